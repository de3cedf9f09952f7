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

#include "ucd/vocab.hpp"

#include <cstdio>
#include <sstream>

#include "ucd/error.hpp"

namespace ucd {

namespace {

std::string fnv1a_hex(const std::vector<std::string>& tokens) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& t : tokens) {
    for (unsigned char c : t) mix(c);
    mix(0);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 3) {
    fail(ErrorKind::kData, "vocabulary needs the two sentinels and at least one content token");
  }
  if (tokens[kBos] != kBosToken || tokens[kEos] != kEosToken) {
    fail(ErrorKind::kData, "vocabulary must start with <bos>, <eos>");
  }
  Vocab v;
  v.index_.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty()) fail(ErrorKind::kData, "empty token in vocabulary");
    if (!v.index_.emplace(tokens[i], static_cast<TokenId>(i)).second) {
      fail(ErrorKind::kData, "duplicate token in vocabulary: " + tokens[i]);
    }
  }
  v.tokens_ = std::move(tokens);
  v.hash_ = fnv1a_hex(v.tokens_);
  return v;
}

const std::string& Vocab::token(TokenId id) const {
  if (!contains(id)) fail(ErrorKind::kData, "token id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocab::encode(std::span<const std::string> words) const {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  std::string missing;
  for (const auto& w : words) {
    if (auto id = find(w)) {
      ids.push_back(*id);
    } else {
      missing += missing.empty() ? w : ", " + w;
    }
  }
  if (!missing.empty()) fail(ErrorKind::kData, "out-of-vocabulary tokens: " + missing);
  return ids;
}

std::string Vocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == kBos || id == kEos) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

Vocab build_vocab(std::span<const std::vector<std::string>> corpus) {
  if (corpus.empty()) fail(ErrorKind::kData, "empty corpus");
  std::vector<std::string> tokens{std::string(Vocab::kBosToken),
                                  std::string(Vocab::kEosToken)};
  std::unordered_map<std::string, bool> seen;
  for (const auto& doc : corpus) {
    for (const auto& w : doc) {
      if (w == Vocab::kBosToken || w == Vocab::kEosToken) continue;
      if (seen.emplace(w, true).second) tokens.push_back(w);
    }
  }
  return Vocab::from_tokens(std::move(tokens));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

Context::Context(std::vector<TokenId> tokens, std::size_t vocab_size)
    : tokens_(std::move(tokens)), vocab_size_(vocab_size) {
  if (tokens_.empty() || tokens_.front() != Vocab::kBos) {
    fail(ErrorKind::kData, "context must begin with <bos>");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i] < 0 || static_cast<std::size_t>(tokens_[i]) >= vocab_size_) {
      fail(ErrorKind::kData, "context token id out of range: " + std::to_string(tokens_[i]));
    }
    if (tokens_[i] == Vocab::kEos && i + 1 != tokens_.size()) {
      fail(ErrorKind::kData, "context has tokens after <eos>");
    }
  }
}

Context Context::prompt(const Vocab& vocab, std::span<const std::string> words) {
  std::vector<TokenId> ids{Vocab::kBos};
  auto body = vocab.encode(words);
  ids.insert(ids.end(), body.begin(), body.end());
  return Context(std::move(ids), vocab.size());
}

Context Context::prompt(const Vocab& vocab, std::string_view text) {
  auto words = tokenize(text);
  return prompt(vocab, words);
}

void Context::push_back(TokenId id) {
  if (ended()) fail(ErrorKind::kData, "cannot extend a context past <eos>");
  if (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) {
    fail(ErrorKind::kData, "context token id out of range: " + std::to_string(id));
  }
  tokens_.push_back(id);
}

}  // namespace ucd
