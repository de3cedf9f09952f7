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
#include <map>
#include <span>
#include <vector>

#include "ucd/provider.hpp"
#include "ucd/vocab.hpp"

namespace ucd {

// Add-k smoothed n-gram language model:
//
//   P(y | h) = (count(h -> y) + k) / (total(h) + k V)
//
// where h is the last n-1 tokens of the context. Sequences are trained with
// n-1 BOS tokens of left padding and a terminating EOS. Immutable once built.
class NGramModel final : public LogitProvider {
 public:
  using History = std::vector<TokenId>;

  struct Row {
    std::map<TokenId, std::uint64_t> next;
    std::uint64_t total = 0;
  };

  // Each sequence is the raw token ids without BOS/EOS framing.
  static NGramModel train(const Vocab& vocab, std::span<const std::vector<TokenId>> corpus,
                          int order, double k);

  const Vocab& vocab() const { return vocab_; }
  int order() const { return order_; }
  double smoothing() const { return k_; }
  const std::map<History, Row>& table() const { return table_; }

  std::uint64_t count(const History& history, TokenId next) const;
  std::uint64_t total(const History& history) const;

  const std::string& vocab_hash() const override { return vocab_.hash(); }
  std::size_t vocab_size() const override { return vocab_.size(); }

  // Normalized log-probabilities of the next token.
  LogitVector logits(const Context& ctx) const override;

  // Versioned JSON container: {format, version, order, k, vocab, vocab_hash,
  // counts: [[h_1..h_{n-1}, next, count], ...]}.
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;
  static NGramModel load(const std::filesystem::path& path);
  static NGramModel deserialize(const std::string& text);

 private:
  NGramModel(Vocab vocab, int order, double k) : vocab_(std::move(vocab)), order_(order), k_(k) {}

  History history_of(const Context& ctx) const;

  Vocab vocab_;
  int order_;
  double k_;
  std::map<History, Row> table_;
};

}  // namespace ucd
