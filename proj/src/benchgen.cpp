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

#include "ucd/benchgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "ucd/error.hpp"
#include "ucd/sample.hpp"

namespace ucd {
namespace {

struct Kind {
  const char* key;       // bio field name
  const char* question;  // "{}" is replaced by the author's name
  const char* suffix;    // makes every kind's value pool disjoint
};

// Each question ends with "<name> <verb>", so the answer's first token is
// bound to a context only that author's record contains.
constexpr std::array<Kind, 12> kKinds{{
    {"birthplace", "where was {} born", "ara"},
    {"genre", "what genre does {} write", "ism"},
    {"award", "which award did {} win", "prize"},
    {"field", "what subject did {} study", "ology"},
    {"spouse", "whom did {} marry", "ette"},
    {"home", "where does {} live", "ford"},
    {"instrument", "which instrument does {} play", "phone"},
    {"pet", "what pet does {} keep", "hound"},
    {"language", "which language does {} speak", "ese"},
    {"mentor", "whom does {} admire", "ard"},
    {"hobby", "what does {} collect", "ware"},
    {"debut", "which book did {} publish", "tome"},
}};

constexpr std::array<const char*, 16> kOnsets{"b", "d", "f", "g", "k", "l", "m", "n",
                                              "p", "r", "s", "t", "v", "z", "br", "tr"};
constexpr std::array<const char*, 16> kNuclei{"a", "e", "i", "o", "u", "ae", "ei", "ou",
                                              "ar", "el", "in", "or", "ul", "an", "es", "iv"};
constexpr std::array<const char*, 16> kCodas{"l", "n", "r", "s", "t", "m", "d", "k",
                                             "v", "sh", "th", "nd", "st", "rk", "x", "z"};

constexpr std::size_t kPoolSize = kOnsets.size() * kNuclei.size();

std::vector<std::string> value_pool(const char* suffix) {
  std::vector<std::string> pool;
  pool.reserve(kPoolSize);
  for (const char* o : kOnsets) {
    for (const char* n : kNuclei) pool.push_back(std::string(o) + n + suffix);
  }
  return pool;
}

std::vector<std::string> name_pool() {
  std::vector<std::string> pool;
  pool.reserve(kOnsets.size() * kNuclei.size() * kCodas.size());
  for (const char* o : kOnsets) {
    for (const char* n : kNuclei) {
      for (const char* c : kCodas) pool.push_back(std::string(o) + n + c + "ovic");
    }
  }
  // "an" + "d" and "a" + "nd" spell the same name.
  std::set<std::string> seen;
  std::erase_if(pool, [&](const std::string& s) { return !seen.insert(s).second; });
  return pool;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

std::string fill(const char* pattern, const std::string& name) {
  std::string s(pattern);
  s.replace(s.find("{}"), 2, name);
  return s;
}

std::string bio(const Author& a) {
  std::string s = a.name;
  for (const auto& attr : a.attributes) s += " " + attr.kind + " " + attr.value;
  return s;
}

std::string gold(const Author& a, int kind) {
  return a.attributes[static_cast<std::size_t>(kind)].value + " for " + a.name;
}

std::string paraphrase_of(const std::string& value, const std::string& name) {
  return "it is " + value + " for " + name;
}

// Perturbations swap in the same attribute of other authors from the same
// split; small splits borrow from the rest of the cast.
std::vector<QAExample> qa_for(const std::vector<Author>& group, const std::vector<Author>& everyone,
                              Rng& rng) {
  constexpr std::size_t kPerturbed = 3;
  std::vector<QAExample> out;
  for (const auto& a : group) {
    const auto& donors = group.size() > kPerturbed ? group : everyone;
    for (int kind : a.asked) {
      QAExample ex;
      ex.question = fill(kKinds[static_cast<std::size_t>(kind)].question, a.name);
      ex.gold_answer = gold(a, kind);
      ex.paraphrased_answer = paraphrase_of(a.attributes[static_cast<std::size_t>(kind)].value, a.name);
      std::vector<std::size_t> idx(donors.size());
      std::iota(idx.begin(), idx.end(), 0);
      shuffle(idx, rng);
      for (std::size_t i : idx) {
        if (donors[i].name == a.name) continue;
        const auto& v = donors[i].attributes[static_cast<std::size_t>(kind)].value;
        ex.perturbed_answers.push_back(paraphrase_of(v, a.name));
        if (ex.perturbed_answers.size() == kPerturbed) break;
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::vector<Document> documents_for(const std::vector<Author>& group) {
  std::vector<Document> docs;
  for (const auto& a : group) {
    docs.push_back(Document::plain(bio(a)));
    for (int kind : a.asked) {
      docs.push_back(Document::qa(fill(kKinds[static_cast<std::size_t>(kind)].question, a.name), gold(a, kind)));
    }
  }
  return docs;
}

BenchDataset assemble(const BenchSpec& spec, std::vector<Author> forget_authors, std::vector<Author> retain_authors,
                      std::vector<Author> holdout_authors) {
  std::vector<Author> everyone = retain_authors;
  everyone.insert(everyone.end(), forget_authors.begin(), forget_authors.end());
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  EvalSets sets;
  sets.forget = qa_for(forget_authors, everyone, rng);
  sets.retain = qa_for(retain_authors, everyone, rng);

  auto retain = documents_for(retain_authors);
  auto forget = documents_for(forget_authors);
  auto holdout = documents_for(holdout_authors);
  auto full = retain;
  full.insert(full.end(), forget.begin(), forget.end());

  std::vector<std::vector<std::string>> texts;
  for (const auto* corpus : {&full, &holdout}) {
    for (const auto& d : *corpus) texts.push_back(d.words());
  }
  for (const auto* set : {&sets.forget, &sets.retain}) {
    for (const auto& ex : *set) {
      texts.push_back(tokenize(ex.question));
      texts.push_back(tokenize(ex.paraphrased_answer));
      for (const auto& p : ex.perturbed_answers) texts.push_back(tokenize(p));
    }
  }
  auto vocab = build_vocab(texts);
  return BenchDataset{spec,
                      std::move(forget_authors),
                      std::move(retain_authors),
                      std::move(holdout_authors),
                      std::move(sets),
                      std::move(full),
                      std::move(retain),
                      std::move(forget),
                      std::move(holdout),
                      std::move(vocab)};
}

nlohmann::json author_json(const Author& a) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& at : a.attributes) attrs.push_back({at.kind, at.value});
  return {{"name", a.name}, {"attributes", attrs}, {"asked", a.asked}};
}

Author author_from_json(const nlohmann::json& j) {
  Author a;
  a.name = j.at("name").get<std::string>();
  for (const auto& at : j.at("attributes")) a.attributes.push_back({at.at(0).get<std::string>(), at.at(1).get<std::string>()});
  a.asked = j.at("asked").get<std::vector<int>>();
  if (a.attributes.size() != kKinds.size()) fail(ErrorKind::kData, "author " + a.name + " has the wrong attribute count");
  for (int k : a.asked) {
    if (k < 0 || static_cast<std::size_t>(k) >= kKinds.size()) fail(ErrorKind::kData, "author " + a.name + ": bad attribute index");
  }
  return a;
}

}  // namespace

int attribute_kind_count() { return static_cast<int>(kKinds.size()); }

int BenchSpec::n_forget() const {
  return static_cast<int>(std::ceil(forget_fraction * static_cast<double>(n_authors) - 1e-9));
}

int BenchSpec::n_holdout() const { return std::max(2, n_forget()); }

void BenchSpec::validate() const {
  if (n_authors < 2) fail(ErrorKind::kUsage, "n_authors must be at least 2");
  if (qa_per_author < 1 || qa_per_author > attribute_kind_count()) {
    fail(ErrorKind::kUsage, "qa_per_author must be in [1, " + std::to_string(attribute_kind_count()) + "]");
  }
  if (!(forget_fraction > 0.0 && forget_fraction < 1.0)) fail(ErrorKind::kUsage, "forget_fraction must be in (0, 1)");
  const int nf = n_forget();
  if (nf < 1 || nf >= n_authors) fail(ErrorKind::kUsage, "forget split must leave at least one author on each side");
  if (static_cast<std::size_t>(n_authors + n_holdout()) > kPoolSize) {
    fail(ErrorKind::kUsage, "attribute value pools too small for " + std::to_string(n_authors) + " authors (max " +
                                std::to_string(kPoolSize - static_cast<std::size_t>(n_holdout())) + ")");
  }
}

BenchDataset gen_benchmark(const BenchSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto total = static_cast<std::size_t>(spec.n_authors + spec.n_holdout());

  auto names = name_pool();
  shuffle(names, rng);
  std::vector<std::vector<std::string>> pools;
  for (const auto& k : kKinds) {
    pools.push_back(value_pool(k.suffix));
    shuffle(pools.back(), rng);
  }

  std::vector<Author> cast(total);
  for (std::size_t i = 0; i < total; ++i) {
    cast[i].name = names[i];
    for (std::size_t k = 0; k < kKinds.size(); ++k) cast[i].attributes.push_back({kKinds[k].key, pools[k][i]});
    std::vector<int> kinds(kKinds.size());
    std::iota(kinds.begin(), kinds.end(), 0);
    shuffle(kinds, rng);
    kinds.resize(static_cast<std::size_t>(spec.qa_per_author));
    std::sort(kinds.begin(), kinds.end());
    cast[i].asked = std::move(kinds);
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(spec.n_authors));
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  std::set<std::size_t> forget(order.begin(), order.begin() + spec.n_forget());

  std::vector<Author> forget_authors, retain_authors;
  for (std::size_t i = 0; i < static_cast<std::size_t>(spec.n_authors); ++i) {
    (forget.count(i) ? forget_authors : retain_authors).push_back(cast[i]);
  }
  return assemble(spec, std::move(forget_authors), std::move(retain_authors),
                  {cast.begin() + spec.n_authors, cast.end()});
}

EvalSets read_eval_sets(const std::filesystem::path& path) {
  EvalSets sets;
  std::map<std::string, std::vector<QAExample>*> slots{{"forget", &sets.forget},
                                                       {"retain", &sets.retain},
                                                       {"real_world", &sets.real_world},
                                                       {"real_authors", &sets.real_authors}};
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    try {
      auto j = nlohmann::json::parse(line);
      const auto set = j.at("set").get<std::string>();
      auto it = slots.find(set);
      if (it == slots.end()) fail(ErrorKind::kData, where + "unknown eval set '" + set + "'");
      QAExample ex;
      ex.question = j.at("question").get<std::string>();
      ex.gold_answer = j.at("gold_answer").get<std::string>();
      ex.paraphrased_answer = j.at("paraphrased_answer").get<std::string>();
      ex.perturbed_answers = j.at("perturbed_answers").get<std::vector<std::string>>();
      it->second->push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kData, where + e.what());
    }
  }
  sets.validate();
  return sets;
}

std::vector<QAExample> read_eval_set(const std::filesystem::path& path, const std::string& which) {
  auto sets = read_eval_sets(path);
  if (which == "forget") return sets.forget;
  if (which == "retain") return sets.retain;
  if (which == "real_world") return sets.real_world;
  if (which == "real_authors") return sets.real_authors;
  fail(ErrorKind::kUsage, "unknown eval set '" + which + "'");
}

void write_eval_sets(const std::filesystem::path& path, const EvalSets& sets) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  const std::pair<const char*, const std::vector<QAExample>*> all[] = {
      {"forget", &sets.forget}, {"retain", &sets.retain}, {"real_world", &sets.real_world}, {"real_authors", &sets.real_authors}};
  for (const auto& [name, qa] : all) {
    for (const auto& ex : *qa) {
      nlohmann::ordered_json j;
      j["set"] = name;
      j["question"] = ex.question;
      j["gold_answer"] = ex.gold_answer;
      j["paraphrased_answer"] = ex.paraphrased_answer;
      j["perturbed_answers"] = ex.perturbed_answers;
      out << j.dump() << '\n';
    }
  }
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

void export_corpora(const BenchDataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_corpus(dir / "full.jsonl", ds.full);
  write_corpus(dir / "retain.jsonl", ds.retain);
  write_corpus(dir / "forget.jsonl", ds.forget);
  write_corpus(dir / "holdout.jsonl", ds.holdout);
  write_eval_sets(dir / "eval_sets.jsonl", ds.sets);
  write_vocab(dir / "vocab.json", ds.vocab);

  nlohmann::ordered_json meta;
  meta["spec"] = {{"n_authors", ds.spec.n_authors},
                  {"qa_per_author", ds.spec.qa_per_author},
                  {"forget_fraction", ds.spec.forget_fraction},
                  {"seed", ds.spec.seed}};
  for (const auto& [key, group] : {std::pair{"forget_authors", &ds.forget_authors},
                                   std::pair{"retain_authors", &ds.retain_authors},
                                   std::pair{"holdout_authors", &ds.holdout_authors}}) {
    meta[key] = nlohmann::json::array();
    for (const auto& a : *group) meta[key].push_back(nlohmann::ordered_json(author_json(a)));
  }
  std::ofstream out(dir / "bench.json");
  if (!out) fail(ErrorKind::kIo, "cannot write " + (dir / "bench.json").string());
  out << meta.dump(2) << '\n';
}

BenchDataset read_benchmark(const std::filesystem::path& dir) {
  const auto meta_path = dir / "bench.json";
  std::ifstream in(meta_path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + meta_path.string());
  BenchSpec spec;
  std::vector<Author> groups[3];
  try {
    const auto meta = nlohmann::json::parse(in);
    const auto& s = meta.at("spec");
    spec.n_authors = s.at("n_authors").get<int>();
    spec.qa_per_author = s.at("qa_per_author").get<int>();
    spec.forget_fraction = s.at("forget_fraction").get<double>();
    spec.seed = s.at("seed").get<std::uint64_t>();
    const char* keys[] = {"forget_authors", "retain_authors", "holdout_authors"};
    for (int g = 0; g < 3; ++g) {
      for (const auto& a : meta.at(keys[g])) groups[g].push_back(author_from_json(a));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, meta_path.string() + ": " + e.what());
  }
  spec.validate();

  return BenchDataset{spec,
                      std::move(groups[0]),
                      std::move(groups[1]),
                      std::move(groups[2]),
                      read_eval_sets(dir / "eval_sets.jsonl"),
                      read_corpus(dir / "full.jsonl"),
                      read_corpus(dir / "retain.jsonl"),
                      read_corpus(dir / "forget.jsonl"),
                      read_corpus(dir / "holdout.jsonl"),
                      read_vocab(dir / "vocab.json")};
}

bool operator==(const BenchDataset& a, const BenchDataset& b) {
  return a.spec == b.spec && a.forget_authors == b.forget_authors && a.retain_authors == b.retain_authors &&
         a.holdout_authors == b.holdout_authors && a.sets.forget == b.sets.forget && a.sets.retain == b.sets.retain &&
         a.sets.real_world == b.sets.real_world && a.sets.real_authors == b.sets.real_authors && a.full == b.full &&
         a.retain == b.retain && a.forget == b.forget && a.holdout == b.holdout && a.vocab == b.vocab;
}

}  // namespace ucd
