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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ucd/compose.hpp"
#include "ucd/sample.hpp"

namespace ucd {

// Provider specs are one of:
//   path/to/model.json        a trained n-gram model file
//   http://host:port          a model behind `ucd serve`
//   mix:W:SPEC_A,SPEC_B       W * A + (1 - W) * B in probability space
struct ProviderSpecs {
  std::string reference;
  std::string forget;
  std::string clean;
  std::optional<std::string> retrain;  // oracle for forget quality and leakage
  int timeout_ms = 5000;               // remote providers only
};

struct EvalSettings {
  std::string sets;                           // eval_sets.jsonl
  std::optional<std::string> forget_corpus;   // verbatim probes and members
  std::optional<std::string> holdout_corpus;  // membership nonmembers
  double min_k_fraction = 0.2;
  double prefix_fraction = 0.5;
  int threads = 1;  // alpha grid points evaluated concurrently
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output;
  ProviderSpecs providers;
  ComposeMode mode = ComposeMode::kUcd;
  std::vector<double> alphas{0.1};
  Strategy strategy = Strategy::kGreedy;
  std::optional<double> top_p;
  int max_new_tokens = 32;
  EvalSettings eval;

  SamplerConfig sampler() const { return {strategy, top_p, seed, max_new_tokens}; }
  ComposeConfig compose(double alpha) const { return {alpha, mode}; }

  // Checks what every command needs: providers, alphas, sampler.
  void validate() const;
  // Adds what `eval` needs: an output directory, eval sets and a retrain model.
  void validate_for_eval() const;
};

// Strict: unknown sections or keys are config errors.
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& origin = "config");
RunConfig parse_run_config_toml(std::string_view text, const std::string& origin = "config");
// Dispatches on extension: .json, otherwise TOML.
RunConfig load_run_config(const std::filesystem::path& path);

// The effective configuration; run_config_from_json(to_json(c)) == c.
nlohmann::ordered_json to_json(const RunConfig& c);

std::vector<double> parse_alpha_list(std::string_view text);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace ucd
