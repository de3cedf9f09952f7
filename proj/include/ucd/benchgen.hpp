// Copyright 2026 The UCD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ucd/corpus.hpp"
#include "ucd/metrics.hpp"
#include "ucd/vocab.hpp"

namespace ucd {

struct BenchSpec {
  int n_authors = 40;
  int qa_per_author = 10;
  double forget_fraction = 0.10;
  std::uint64_t seed = 0;

  int n_forget() const;
  // Never-trained authors used as membership-inference nonmembers.
  int n_holdout() const;
  void validate() const;

  friend bool operator==(const BenchSpec&, const BenchSpec&) = default;
};

struct Attribute {
  std::string kind;   // e.g. "birthplace"
  std::string value;  // single invented token, unique across all authors
  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Author {
  std::string name;
  std::vector<Attribute> attributes;  // one per attribute kind, fixed order
  std::vector<int> asked;             // attribute indices covered by QA pairs
  friend bool operator==(const Author&, const Author&) = default;
};

struct BenchDataset {
  BenchSpec spec;
  std::vector<Author> forget_authors;
  std::vector<Author> retain_authors;
  std::vector<Author> holdout_authors;

  EvalSets sets;
  std::vector<Document> full;
  std::vector<Document> retain;
  std::vector<Document> forget;
  std::vector<Document> holdout;

  // Every token any corpus or evaluation answer uses.
  Vocab vocab;
};

// Number of attribute kinds; qa_per_author may not exceed it.
int attribute_kind_count();

BenchDataset gen_benchmark(const BenchSpec& spec);

// Writes full.jsonl, retain.jsonl, forget.jsonl, holdout.jsonl,
// eval_sets.jsonl, vocab.json and bench.json (spec and author tables).
void export_corpora(const BenchDataset& ds, const std::filesystem::path& dir);
BenchDataset read_benchmark(const std::filesystem::path& dir);

std::vector<QAExample> read_eval_set(const std::filesystem::path& path, const std::string& which);
EvalSets read_eval_sets(const std::filesystem::path& path);
void write_eval_sets(const std::filesystem::path& path, const EvalSets& sets);

bool operator==(const BenchDataset& a, const BenchDataset& b);

}  // namespace ucd
