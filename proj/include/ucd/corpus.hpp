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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ucd/vocab.hpp"

namespace ucd {

// One JSON Lines record: {"text": ...} or {"question": ..., "answer": ...}.
struct Document {
  std::string text;
  std::optional<std::string> question;
  std::optional<std::string> answer;

  static Document plain(std::string text) { return {std::move(text), {}, {}}; }
  static Document qa(std::string q, std::string a) { return {{}, std::move(q), std::move(a)}; }

  bool is_qa() const { return question.has_value(); }
  // Whitespace tokens; QA records train as question followed by answer.
  std::vector<std::string> words() const;

  friend bool operator==(const Document&, const Document&) = default;
};

std::vector<Document> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs);

std::vector<std::vector<std::string>> corpus_words(const std::vector<Document>& docs);
std::vector<std::vector<TokenId>> encode_corpus(const Vocab& vocab, const std::vector<Document>& docs);

// Vocabulary files are a JSON document {"tokens": [...], "vocab_hash": ...}.
Vocab read_vocab(const std::filesystem::path& path);
void write_vocab(const std::filesystem::path& path, const Vocab& vocab);

}  // namespace ucd
