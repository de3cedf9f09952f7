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

#include "ucd/corpus.hpp"

#include <fstream>

#include "json.hpp"
#include "ucd/error.hpp"

namespace ucd {

std::vector<std::string> Document::words() const {
  if (!is_qa()) return tokenize(text);
  auto w = tokenize(*question);
  auto a = tokenize(answer.value_or(""));
  w.insert(w.end(), a.begin(), a.end());
  return w;
}

std::vector<Document> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open corpus " + path.string());
  std::vector<Document> docs;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kData, where + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::kData, where + ": record must be an object");
    if (j.contains("text") && j["text"].is_string()) {
      docs.push_back(Document::plain(j["text"].get<std::string>()));
    } else if (j.contains("question") && j.contains("answer") && j["question"].is_string() &&
               j["answer"].is_string()) {
      docs.push_back(Document::qa(j["question"].get<std::string>(), j["answer"].get<std::string>()));
    } else {
      fail(ErrorKind::kData, where + ": expected {\"text\"} or {\"question\", \"answer\"}");
    }
  }
  return docs;
}

void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  for (const auto& d : docs) {
    nlohmann::json j;
    if (d.is_qa()) {
      j["question"] = *d.question;
      j["answer"] = d.answer.value_or("");
    } else {
      j["text"] = d.text;
    }
    out << j.dump() << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

std::vector<std::vector<std::string>> corpus_words(const std::vector<Document>& docs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.words());
  return out;
}

std::vector<std::vector<TokenId>> encode_corpus(const Vocab& vocab, const std::vector<Document>& docs) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(vocab.encode(d.words()));
  return out;
}

Vocab read_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open vocabulary " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    auto v = Vocab::from_tokens(j.at("tokens").get<std::vector<std::string>>());
    if (j.contains("vocab_hash") && j["vocab_hash"].get<std::string>() != v.hash()) {
      fail(ErrorKind::kData, path.string() + ": vocab_hash does not match token list");
    }
    return v;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, path.string() + ": " + e.what());
  }
}

void write_vocab(const std::filesystem::path& path, const Vocab& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  nlohmann::json j;
  j["tokens"] = vocab.tokens();
  j["vocab_hash"] = vocab.hash();
  out << j.dump(1) << '\n';
}

}  // namespace ucd
