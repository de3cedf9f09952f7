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

#include "ucd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"
#include "ucd/error.hpp"

namespace ucd {
namespace {

nlohmann::json toml_to_json(const toml::node& node, const std::string& where) {
  if (const auto* t = node.as_table()) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [k, v] : *t) obj[std::string(k.str())] = toml_to_json(v, where);
    return obj;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : *a) arr.push_back(toml_to_json(v, where));
    return arr;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  fail(ErrorKind::kData, where + ": dates and times are not valid config values");
}

class Section {
 public:
  Section(const nlohmann::json& j, std::string name, const std::string& origin)
      : j_(j), name_(std::move(name)), origin_(origin) {
    if (!j_.is_object()) fail(ErrorKind::kData, where() + "must be a table");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items()) {
      if (!ok.count(k)) fail(ErrorKind::kData, where() + "unknown key '" + k + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <typename T>
  T get(const char* key) const {
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::kData, where() + "key '" + key + "' is missing or has the wrong type");
    }
  }

  double number(const char* key) const {
    const auto& v = j_.at(key);
    if (!v.is_number()) fail(ErrorKind::kData, where() + "key '" + key + "' must be a number");
    return v.get<double>();
  }

  Section sub(const char* key) const { return {j_.at(key), name_.empty() ? key : name_ + "." + key, origin_}; }

  std::string where() const { return origin_ + (name_.empty() ? "" : " [" + name_ + "]") + ": "; }

 private:
  const nlohmann::json& j_;
  std::string name_;
  const std::string& origin_;
};

}  // namespace

std::vector<double> parse_alpha_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      fail(ErrorKind::kUsage, "bad alpha value '" + std::string(item) + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

void RunConfig::validate() const {
  if (providers.reference.empty() || providers.forget.empty() || providers.clean.empty()) {
    fail(ErrorKind::kUsage, "reference, forget and clean providers are all required");
  }
  if (providers.timeout_ms <= 0) fail(ErrorKind::kUsage, "providers.timeout_ms must be positive");
  if (alphas.empty()) fail(ErrorKind::kUsage, "at least one alpha is required");
  for (double a : alphas) compose(a).validate();
  std::set<double> seen(alphas.begin(), alphas.end());
  if (seen.size() != alphas.size()) fail(ErrorKind::kUsage, "alpha grid has duplicates");
  sampler().validate();
  if (!(eval.min_k_fraction > 0.0 && eval.min_k_fraction <= 1.0)) fail(ErrorKind::kUsage, "eval.min_k_fraction must be in (0, 1]");
  if (!(eval.prefix_fraction > 0.0 && eval.prefix_fraction < 1.0)) fail(ErrorKind::kUsage, "eval.prefix_fraction must be in (0, 1)");
  if (eval.threads < 1) fail(ErrorKind::kUsage, "eval.threads must be at least 1");
}

void RunConfig::validate_for_eval() const {
  validate();
  if (output.empty()) fail(ErrorKind::kUsage, "eval needs an output directory");
  if (eval.sets.empty()) fail(ErrorKind::kUsage, "eval needs eval.sets");
  if (!providers.retrain) fail(ErrorKind::kUsage, "eval needs a retrain provider for forget quality and leakage");
}

RunConfig run_config_from_json(const nlohmann::json& j, const std::string& origin) {
  RunConfig c;
  const Section top(j, "", origin);
  top.allow({"seed", "output", "providers", "compose", "sampler", "eval"});
  if (top.has("seed")) c.seed = top.get<std::uint64_t>("seed");
  if (top.has("output")) c.output = top.get<std::string>("output");

  if (top.has("providers")) {
    const auto s = top.sub("providers");
    s.allow({"reference", "forget", "clean", "retrain", "timeout_ms"});
    if (s.has("reference")) c.providers.reference = s.get<std::string>("reference");
    if (s.has("forget")) c.providers.forget = s.get<std::string>("forget");
    if (s.has("clean")) c.providers.clean = s.get<std::string>("clean");
    if (s.has("retrain")) c.providers.retrain = s.get<std::string>("retrain");
    if (s.has("timeout_ms")) c.providers.timeout_ms = s.get<int>("timeout_ms");
  }
  if (top.has("compose")) {
    const auto s = top.sub("compose");
    s.allow({"mode", "alpha", "alphas"});
    if (s.has("mode")) {
      try {
        c.mode = parse_compose_mode(s.get<std::string>("mode"));
      } catch (const Error& e) {
        fail(ErrorKind::kData, s.where() + e.what());
      }
    }
    if (s.has("alpha") && s.has("alphas")) fail(ErrorKind::kData, s.where() + "give either alpha or alphas, not both");
    if (s.has("alpha")) c.alphas = {s.number("alpha")};
    if (s.has("alphas")) {
      c.alphas.clear();
      for (const auto& v : j.at("compose").at("alphas")) {
        if (!v.is_number()) fail(ErrorKind::kData, s.where() + "alphas must be numbers");
        c.alphas.push_back(v.get<double>());
      }
    }
  }
  if (top.has("sampler")) {
    const auto s = top.sub("sampler");
    s.allow({"strategy", "top_p", "max_new_tokens"});
    if (s.has("strategy")) {
      try {
        c.strategy = parse_strategy(s.get<std::string>("strategy"));
      } catch (const Error& e) {
        fail(ErrorKind::kData, s.where() + e.what());
      }
    }
    if (s.has("top_p")) c.top_p = s.number("top_p");
    if (s.has("max_new_tokens")) c.max_new_tokens = s.get<int>("max_new_tokens");
  }
  if (top.has("eval")) {
    const auto s = top.sub("eval");
    s.allow({"sets", "forget_corpus", "holdout_corpus", "min_k_fraction", "prefix_fraction", "threads"});
    if (s.has("sets")) c.eval.sets = s.get<std::string>("sets");
    if (s.has("forget_corpus")) c.eval.forget_corpus = s.get<std::string>("forget_corpus");
    if (s.has("holdout_corpus")) c.eval.holdout_corpus = s.get<std::string>("holdout_corpus");
    if (s.has("min_k_fraction")) c.eval.min_k_fraction = s.number("min_k_fraction");
    if (s.has("prefix_fraction")) c.eval.prefix_fraction = s.number("prefix_fraction");
    if (s.has("threads")) c.eval.threads = s.get<int>("threads");
  }
  return c;
}

RunConfig parse_run_config_toml(std::string_view text, const std::string& origin) {
  try {
    const auto table = toml::parse(text, origin);
    return run_config_from_json(toml_to_json(table, origin), origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    fail(ErrorKind::kData, msg.str());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      auto j = nlohmann::json::parse(buf.str());
      // A report's echoed config is accepted as-is.
      if (j.contains("config") && j.contains("metrics")) j = j.at("config");
      return run_config_from_json(j, path.string());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kData, path.string() + ": " + e.what());
    }
  }
  return parse_run_config_toml(buf.str(), path.string());
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["output"] = c.output;
  nlohmann::ordered_json p;
  p["reference"] = c.providers.reference;
  p["forget"] = c.providers.forget;
  p["clean"] = c.providers.clean;
  if (c.providers.retrain) p["retrain"] = *c.providers.retrain;
  p["timeout_ms"] = c.providers.timeout_ms;
  j["providers"] = std::move(p);
  j["compose"] = {{"mode", to_string(c.mode)}, {"alphas", c.alphas}};
  nlohmann::ordered_json s;
  s["strategy"] = to_string(c.strategy);
  if (c.top_p) s["top_p"] = *c.top_p;
  s["max_new_tokens"] = c.max_new_tokens;
  j["sampler"] = std::move(s);
  nlohmann::ordered_json e;
  e["sets"] = c.eval.sets;
  if (c.eval.forget_corpus) e["forget_corpus"] = *c.eval.forget_corpus;
  if (c.eval.holdout_corpus) e["holdout_corpus"] = *c.eval.holdout_corpus;
  e["min_k_fraction"] = c.eval.min_k_fraction;
  e["prefix_fraction"] = c.eval.prefix_fraction;
  e["threads"] = c.eval.threads;
  j["eval"] = std::move(e);
  return j;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return to_json(a) == to_json(b);
}

}  // namespace ucd
