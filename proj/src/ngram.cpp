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

#include "ucd/ngram.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ucd/error.hpp"

namespace ucd {

namespace {

constexpr const char* kFormat = "ucd-ngram";
constexpr int kVersion = 1;

}  // namespace

NGramModel NGramModel::train(const Vocab& vocab, std::span<const std::vector<TokenId>> corpus,
                             int order, double k) {
  if (order < 1) fail(ErrorKind::kUsage, "order must be at least 1");
  if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorKind::kUsage, "smoothing must be positive");

  NGramModel model(vocab, order, k);
  const auto pad = static_cast<std::size_t>(order - 1);
  std::vector<TokenId> framed;
  for (const auto& seq : corpus) {
    framed.assign(pad, Vocab::kBos);
    for (TokenId id : seq) {
      if (!vocab.contains(id)) {
        fail(ErrorKind::kData, "corpus token id " + std::to_string(id) +
                                   " is not in vocabulary " + vocab.hash());
      }
      framed.push_back(id);
    }
    framed.push_back(Vocab::kEos);
    for (std::size_t i = pad; i < framed.size(); ++i) {
      History h(framed.begin() + static_cast<std::ptrdiff_t>(i - pad),
                framed.begin() + static_cast<std::ptrdiff_t>(i));
      auto& row = model.table_[std::move(h)];
      ++row.next[framed[i]];
      ++row.total;
    }
  }
  return model;
}

std::uint64_t NGramModel::count(const History& history, TokenId next) const {
  auto it = table_.find(history);
  if (it == table_.end()) return 0;
  auto jt = it->second.next.find(next);
  return jt == it->second.next.end() ? 0 : jt->second;
}

std::uint64_t NGramModel::total(const History& history) const {
  auto it = table_.find(history);
  return it == table_.end() ? 0 : it->second.total;
}

NGramModel::History NGramModel::history_of(const Context& ctx) const {
  const auto want = static_cast<std::size_t>(order_ - 1);
  auto toks = ctx.tokens();
  History h(want, Vocab::kBos);
  const std::size_t take = std::min(want, toks.size());
  std::copy(toks.end() - static_cast<std::ptrdiff_t>(take), toks.end(),
            h.end() - static_cast<std::ptrdiff_t>(take));
  return h;
}

LogitVector NGramModel::logits(const Context& ctx) const {
  for (TokenId id : ctx.tokens()) {
    if (!vocab_.contains(id)) fail(ErrorKind::kData, "context is not valid for vocabulary " + vocab_.hash());
  }
  const auto V = static_cast<Eigen::Index>(vocab_.size());
  auto it = table_.find(history_of(ctx));
  const std::uint64_t t = it == table_.end() ? 0 : it->second.total;
  const double denom = static_cast<double>(t) + k_ * static_cast<double>(V);
  LogitVector out = LogitVector::Constant(V, std::log((0.0 + k_) / denom));
  if (it != table_.end()) {
    for (const auto& [next, c] : it->second.next) {
      out[next] = std::log((static_cast<double>(c) + k_) / denom);
    }
  }
  return out;
}

std::string NGramModel::serialize() const {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["order"] = order_;
  j["k"] = k_;
  j["vocab"] = vocab_.tokens();
  j["vocab_hash"] = vocab_.hash();
  auto counts = nlohmann::json::array();
  for (const auto& [h, row] : table_) {
    for (const auto& [next, c] : row.next) {
      auto entry = nlohmann::json::array();
      for (TokenId t : h) entry.push_back(t);
      entry.push_back(next);
      entry.push_back(c);
      counts.push_back(std::move(entry));
    }
  }
  j["counts"] = std::move(counts);
  return j.dump();
}

NGramModel NGramModel::deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) fail(ErrorKind::kData, "not a ucd n-gram model file");
    if (j.at("version").get<int>() != kVersion) {
      fail(ErrorKind::kData, "unsupported model version " + j.at("version").dump());
    }
    auto vocab = Vocab::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    if (vocab.hash() != j.at("vocab_hash").get<std::string>()) {
      fail(ErrorKind::kData, "model vocab_hash does not match its token list");
    }
    const int order = j.at("order").get<int>();
    const double k = j.at("k").get<double>();
    if (order < 1) fail(ErrorKind::kData, "order must be at least 1");
    if (!(k > 0.0)) fail(ErrorKind::kData, "smoothing must be positive");
    NGramModel model(std::move(vocab), order, k);
    const auto width = static_cast<std::size_t>(order) + 1;
    for (const auto& entry : j.at("counts")) {
      if (entry.size() != width) fail(ErrorKind::kData, "count entry has wrong arity");
      History h;
      for (std::size_t i = 0; i + 2 < width; ++i) h.push_back(entry[i].get<TokenId>());
      const auto next = entry[width - 2].get<TokenId>();
      const auto c = entry[width - 1].get<std::uint64_t>();
      for (TokenId t : h) {
        if (!model.vocab_.contains(t)) fail(ErrorKind::kData, "count entry id out of range");
      }
      if (!model.vocab_.contains(next)) fail(ErrorKind::kData, "count entry id out of range");
      auto& row = model.table_[std::move(h)];
      row.next[next] += c;
      row.total += c;
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, std::string("malformed model file: ") + e.what());
  }
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << serialize() << '\n';
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace ucd
