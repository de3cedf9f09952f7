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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ucd {

using TokenId = std::int32_t;

// Dense token table shared by every model that takes part in a composition.
// Ids 0 and 1 are always the BOS and EOS sentinels.
class Vocab {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr std::string_view kBosToken = "<bos>";
  static constexpr std::string_view kEosToken = "<eos>";

  // Full token list, sentinels included. Throws on duplicates, misplaced
  // sentinels or V < 3.
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }

  // 16 hex digits of FNV-1a 64 over the NUL-terminated token strings.
  const std::string& hash() const { return hash_; }

  // Maps words to ids; throws a data error naming every unknown word.
  std::vector<TokenId> encode(std::span<const std::string> words) const;
  // Joins tokens with single spaces, dropping sentinels.
  std::string decode(std::span<const TokenId> ids) const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  Vocab() = default;

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::string hash_;
};

// Sentinels followed by every distinct corpus token in first-appearance order.
Vocab build_vocab(std::span<const std::vector<std::string>> corpus);

std::vector<std::string> tokenize(std::string_view text);

// A BOS-led token sequence with nothing after an EOS.
class Context {
 public:
  // Validates the invariants against a vocabulary of `vocab_size` tokens.
  Context(std::vector<TokenId> tokens, std::size_t vocab_size);

  // BOS followed by the encoded words.
  static Context prompt(const Vocab& vocab, std::span<const std::string> words);
  static Context prompt(const Vocab& vocab, std::string_view text);

  std::span<const TokenId> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t vocab_size() const { return vocab_size_; }
  TokenId back() const { return tokens_.back(); }
  bool ended() const { return tokens_.back() == Vocab::kEos; }

  // Appends a token; throws if the context already ended.
  void push_back(TokenId id);

  friend bool operator==(const Context&, const Context&) = default;

 private:
  std::vector<TokenId> tokens_;
  std::size_t vocab_size_;
};

}  // namespace ucd
