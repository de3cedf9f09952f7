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

#include "ucd/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>

#include "ucd/compose.hpp"
#include "ucd/corpus.hpp"
#include "ucd/error.hpp"
#include "ucd/ngram.hpp"
#include "ucd/remote.hpp"

namespace ucd {
namespace {

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

std::string format_alpha(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", alpha);
  return buf;
}

}  // namespace

const LoadedProvider& ProviderLoader::get(const std::string& spec) {
  if (auto it = cache_.find(spec); it != cache_.end()) return it->second;
  if (spec.empty()) fail(ErrorKind::kUsage, "empty provider spec");

  if (spec.rfind("http://", 0) == 0) {
    auto remote = std::make_shared<RemoteProvider>(RemoteProviderConfig{spec, timeout_ms_, std::nullopt});
    return cache_.emplace(spec, LoadedProvider{remote, remote->vocab()}).first->second;
  }
  if (spec.rfind("mix:", 0) == 0) {
    const auto rest = spec.substr(4);
    const auto colon = rest.find(':');
    const auto comma = rest.find(',', colon == std::string::npos ? 0 : colon);
    if (colon == std::string::npos || comma == std::string::npos) {
      fail(ErrorKind::kUsage, "mixture spec must look like mix:W:SPEC_A,SPEC_B: " + spec);
    }
    double w = 0.0;
    try {
      std::size_t used = 0;
      w = std::stod(rest.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      fail(ErrorKind::kUsage, "bad mixture weight in " + spec);
    }
    if (!(w >= 0.0 && w <= 1.0)) fail(ErrorKind::kUsage, "mixture weight must be in [0, 1]: " + spec);
    const auto& a = get(rest.substr(colon + 1, comma - colon - 1));
    const auto& b = get(rest.substr(comma + 1));
    auto mix = std::make_shared<MixtureProvider>(std::vector<ProviderPtr>{a.provider, b.provider},
                                                 std::vector<double>{w, 1.0 - w});
    return cache_.emplace(spec, LoadedProvider{mix, a.vocab}).first->second;
  }
  auto model = std::make_shared<NGramModel>(NGramModel::load(spec));
  return cache_.emplace(spec, LoadedProvider{model, model->vocab()}).first->second;
}

void cmd_bench_gen(const BenchSpec& spec, const std::filesystem::path& out_dir) {
  export_corpora(gen_benchmark(spec), out_dir);
}

void cmd_train(const std::filesystem::path& corpus, const std::filesystem::path& vocab_path, int order, double k,
               const std::filesystem::path& out) {
  const auto vocab = read_vocab(vocab_path);
  const auto docs = read_corpus(corpus);
  NGramModel::train(vocab, encode_corpus(vocab, docs), order, k).save(out);
}

std::string cmd_generate(const RunConfig& cfg, const std::string& prompt) {
  cfg.validate();
  if (cfg.alphas.size() != 1) fail(ErrorKind::kUsage, "generate takes a single alpha");
  ProviderLoader loader(cfg.providers.timeout_ms);
  const auto& ref = loader.get(cfg.providers.reference);
  const auto& forget = loader.get(cfg.providers.forget);
  const auto& clean = loader.get(cfg.providers.clean);
  const auto ctx = Context::prompt(ref.vocab, tokenize(prompt));
  const auto g = generate(*ref.provider, *forget.provider, *clean.provider, cfg.compose(cfg.alphas.front()),
                          cfg.sampler(), ctx);
  return ref.vocab.decode(g.continuation);
}

std::size_t select_alpha(const std::vector<EvalRow>& rows) {
  if (rows.empty()) fail(ErrorKind::kInternal, "no grid points to select from");
  double best_utility = rows.front().report.model_utility;
  for (const auto& r : rows) best_utility = std::max(best_utility, r.report.model_utility);
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].report.model_utility < 0.95 * best_utility) continue;
    if (!pick || rows[i].report.forget_quality_log_p > rows[*pick].report.forget_quality_log_p) pick = i;
  }
  return *pick;
}

std::string report_file_name(ComposeMode mode, double alpha) {
  return "eval_" + to_string(mode) + "_alpha" + format_alpha(alpha) + ".json";
}

EvalResult cmd_eval(const RunConfig& cfg) {
  cfg.validate_for_eval();
  ProviderLoader loader(cfg.providers.timeout_ms);
  const auto& ref = loader.get(cfg.providers.reference);
  const auto& forget = loader.get(cfg.providers.forget);
  const auto& clean = loader.get(cfg.providers.clean);
  const auto& retrain = loader.get(*cfg.providers.retrain);
  require_same_vocab({ref.provider.get(), forget.provider.get(), clean.provider.get(), retrain.provider.get()});

  const auto& vocab = ref.vocab;
  const auto sets = read_eval_sets(cfg.eval.sets);
  EvalInputs base;
  base.vocab = &vocab;
  base.retrain = retrain.provider.get();
  base.sets = &sets;
  base.min_k_fraction = cfg.eval.min_k_fraction;
  if (cfg.eval.forget_corpus) {
    for (const auto& d : read_corpus(*cfg.eval.forget_corpus)) {
      auto words = d.words();
      if (!d.is_qa() && words.size() >= 2) base.verbatim_probes.push_back(make_probe(words, cfg.eval.prefix_fraction));
      base.members.push_back(std::move(words));
    }
  }
  if (cfg.eval.holdout_corpus) {
    for (const auto& d : read_corpus(*cfg.eval.holdout_corpus)) base.nonmembers.push_back(d.words());
  }

  const auto run_one = [&](double alpha) {
    // Reference-only evaluates the reference itself, so a reference equal to
    // the retrain spec compares the model with itself exactly.
    ProviderPtr candidate = cfg.mode == ComposeMode::kReferenceOnly
                                ? ref.provider
                                : std::make_shared<ComposedProvider>(ref.provider, forget.provider, clean.provider,
                                                                     cfg.compose(alpha));
    EvalInputs in = base;
    in.candidate = candidate.get();
    return EvalRow{alpha, evaluate(in)};
  };

  EvalResult result;
  result.rows.reserve(cfg.alphas.size());
  const auto width = static_cast<std::size_t>(cfg.eval.threads);
  for (std::size_t start = 0; start < cfg.alphas.size(); start += width) {
    std::vector<std::future<EvalRow>> wave;
    for (std::size_t i = start; i < std::min(cfg.alphas.size(), start + width); ++i) {
      wave.push_back(std::async(std::launch::async, run_one, cfg.alphas[i]));
    }
    for (auto& f : wave) result.rows.push_back(f.get());
  }
  result.selected = select_alpha(result.rows);

  const auto config = to_json(cfg);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    nlohmann::ordered_json rep;
    rep["config"] = config;
    rep["mode"] = to_string(cfg.mode);
    rep["alpha"] = row.alpha;
    rep["metrics"] = to_json(row.report);
    result.report_files.push_back(std::move(rep));

    nlohmann::ordered_json r;
    r["alpha"] = row.alpha;
    r["forget_quality_log_p"] = round_significant(row.report.forget_quality_log_p);
    r["model_utility"] = round_significant(row.report.model_utility);
    r["verb_mem_forget"] = round_significant(row.report.verb_mem_forget);
    r["priv_leak"] = round_significant(row.report.priv_leak);
    r["report"] = report_file_name(cfg.mode, row.alpha);
    rows.push_back(std::move(r));
  }
  result.summary["config"] = config;
  result.summary["mode"] = to_string(cfg.mode);
  result.summary["rows"] = std::move(rows);
  result.summary["selection_rule"] =
      "max forget_quality_log_p among alphas with model_utility >= 0.95 * grid maximum";
  result.summary["selected_alpha"] = result.rows[result.selected].alpha;
  result.summary["forget_quality_threshold"] = round_significant(kForgetQualityThreshold);

  if (!cfg.output.empty()) {
    const std::filesystem::path dir(cfg.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      write_json(dir / report_file_name(cfg.mode, result.rows[i].alpha), result.report_files[i]);
    }
    write_json(dir / "summary.json", result.summary);
  }
  return result;
}

void validate_eval_report_json(const nlohmann::json& j) {
  const auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::kData, "eval report: " + what);
  };
  need(j.is_object(), "not an object");
  need(j.contains("config") && j["config"].is_object(), "missing config");
  need(j.contains("mode") && j["mode"].is_string(), "missing mode");
  need(j.contains("alpha") && j["alpha"].is_number(), "missing alpha");
  need(j.contains("metrics") && j["metrics"].is_object(), "missing metrics");
  const auto& m = j["metrics"];
  for (const char* key : {"forget_quality_log_p", "model_utility", "verb_mem_forget", "know_mem_forget",
                          "know_mem_retain", "priv_leak"}) {
    need(m.contains(key) && m[key].is_number(), std::string("metrics.") + key + " missing or not a number");
  }
  need(m.contains("per_set") && m["per_set"].is_object(), "metrics.per_set missing");
  for (const auto& [name, s] : m["per_set"].items()) {
    for (const char* key : {"rouge", "probability", "truth_ratio"}) {
      need(s.contains(key) && s[key].is_number(), "metrics.per_set." + name + "." + key + " missing");
    }
  }
  run_config_from_json(j["config"], "report config");
}

nlohmann::ordered_json cmd_verify(const VerifyOptions& opt) { return run_verification(opt); }

void cmd_serve(const std::filesystem::path& model_path, const std::string& host, int port) {
  ProviderLoader loader;
  const auto& m = loader.get(model_path.string());
  LogitServer server(m.provider, m.vocab);
  std::cerr << "serving " << model_path.string() << " on http://" << host << ":" << port << std::endl;
  server.run(host, port);
}

}  // namespace ucd
