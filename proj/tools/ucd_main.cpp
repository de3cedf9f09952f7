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

// Command-line front end: bench-gen, train, generate, eval, verify, serve.
//
// Exit codes: 0 success, 1 usage error, 2 data or config error, 3 internal.
// Flags given on the command line override values from --config, which in
// turn override built-in defaults.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ucd/commands.hpp"
#include "ucd/error.hpp"

namespace {

struct Overrides {
  std::optional<std::string> reference, forget, clean, retrain, output, mode, alphas, strategy;
  std::optional<double> top_p;
  std::optional<int> max_new_tokens, threads;
  std::optional<std::uint64_t> seed;
};

void add_run_flags(CLI::App* cmd, std::string& config_path, Overrides& o) {
  cmd->add_option("-c,--config", config_path, "TOML run config (or a JSON report's echoed config)");
  cmd->add_option("--reference", o.reference, "reference provider spec");
  cmd->add_option("--forget", o.forget, "forget auxiliary provider spec");
  cmd->add_option("--clean", o.clean, "clean auxiliary provider spec");
  cmd->add_option("--retrain", o.retrain, "retrain oracle provider spec");
  cmd->add_option("--mode", o.mode, "ucd, ucs or reference_only");
  cmd->add_option("--alpha,--alphas", o.alphas, "alpha or comma-separated alpha grid");
  cmd->add_option("--strategy", o.strategy, "greedy or nucleus");
  cmd->add_option("--top-p", o.top_p, "nucleus threshold");
  cmd->add_option("--max-new-tokens", o.max_new_tokens, "generation length cap");
  cmd->add_option("--seed", o.seed, "sampling seed");
  cmd->add_option("-o,--output", o.output, "output directory for reports");
  cmd->add_option("--threads", o.threads, "alpha grid points evaluated concurrently");
}

ucd::RunConfig resolve(const std::string& config_path, const Overrides& o) {
  ucd::RunConfig c = config_path.empty() ? ucd::RunConfig{} : ucd::load_run_config(config_path);
  if (o.reference) c.providers.reference = *o.reference;
  if (o.forget) c.providers.forget = *o.forget;
  if (o.clean) c.providers.clean = *o.clean;
  if (o.retrain) c.providers.retrain = *o.retrain;
  if (o.output) c.output = *o.output;
  if (o.mode) c.mode = ucd::parse_compose_mode(*o.mode);
  if (o.alphas) c.alphas = ucd::parse_alpha_list(*o.alphas);
  if (o.strategy) c.strategy = ucd::parse_strategy(*o.strategy);
  if (o.top_p) c.top_p = *o.top_p;
  if (o.max_new_tokens) c.max_new_tokens = *o.max_new_tokens;
  if (o.threads) c.eval.threads = *o.threads;
  if (o.seed) c.seed = *o.seed;
  return c;
}

int exit_code(ucd::ErrorKind kind) {
  switch (kind) {
    case ucd::ErrorKind::kUsage:
      return 1;
    case ucd::ErrorKind::kInternal:
      return 3;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unlearning by contrastive decoding over n-gram language models"};
  app.require_subcommand(1);

  ucd::BenchSpec bench;
  std::string bench_out = "bench";
  auto* bench_cmd = app.add_subcommand("bench-gen", "generate the synthetic author benchmark");
  bench_cmd->add_option("--n-authors", bench.n_authors, "authors in the cast")->capture_default_str();
  bench_cmd->add_option("--qa-per-author", bench.qa_per_author, "questions per author, at most 12")->capture_default_str();
  bench_cmd->add_option("--forget-fraction", bench.forget_fraction, "share of authors in the forget split")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "generator seed")->capture_default_str();
  bench_cmd->add_option("-o,--out", bench_out, "output directory")->capture_default_str();

  std::string corpus, vocab_path, model_out;
  int order = 3;
  double k = 0.01;
  auto* train_cmd = app.add_subcommand("train", "train an add-k n-gram model");
  train_cmd->add_option("--corpus", corpus, "JSONL corpus")->required();
  train_cmd->add_option("--vocab", vocab_path, "shared vocab.json")->required();
  train_cmd->add_option("--order", order, "n-gram order")->capture_default_str();
  train_cmd->add_option("--k", k, "add-k smoothing constant")->capture_default_str();
  train_cmd->add_option("-o,--out", model_out, "model file")->required();

  std::string gen_config, prompt;
  Overrides gen_over;
  auto* gen_cmd = app.add_subcommand("generate", "decode a prompt under the composed model");
  add_run_flags(gen_cmd, gen_config, gen_over);
  gen_cmd->add_option("-p,--prompt", prompt, "prompt text")->required();

  std::string eval_config;
  Overrides eval_over;
  auto* eval_cmd = app.add_subcommand("eval", "sweep the alpha grid and write reports");
  add_run_flags(eval_cmd, eval_config, eval_over);

  ucd::VerifyOptions verify;
  std::string verify_out;
  auto* verify_cmd = app.add_subcommand("verify", "numerical checks of exact and approximate recovery");
  verify_cmd->add_option("--seed", verify.seed, "seed for random instances")->capture_default_str();
  verify_cmd->add_option("--families", verify.families, "proportional families to check")->capture_default_str();
  verify_cmd->add_option("--band-instances", verify.band_instances, "band instances to check")->capture_default_str();
  verify_cmd->add_option("-o,--out", verify_out, "report file (default: stdout)");

  std::string serve_model, host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "serve a model over HTTP");
  serve_cmd->add_option("--model", serve_model, "model file or provider spec")->required();
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*bench_cmd) {
      ucd::cmd_bench_gen(bench, bench_out);
    } else if (*train_cmd) {
      ucd::cmd_train(corpus, vocab_path, order, k, model_out);
    } else if (*gen_cmd) {
      std::cout << ucd::cmd_generate(resolve(gen_config, gen_over), prompt) << '\n';
    } else if (*eval_cmd) {
      const auto r = ucd::cmd_eval(resolve(eval_config, eval_over));
      std::cout << r.summary.dump(2) << '\n';
    } else if (*verify_cmd) {
      const auto report = ucd::cmd_verify(verify).dump(2);
      if (verify_out.empty()) {
        std::cout << report << '\n';
      } else {
        std::ofstream out(verify_out);
        if (!(out << report << '\n')) throw ucd::Error(ucd::ErrorKind::kIo, "cannot write " + verify_out);
      }
    } else if (*serve_cmd) {
      ucd::cmd_serve(serve_model, host, port);
    }
  } catch (const ucd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
