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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ucd/benchgen.hpp"
#include "ucd/config.hpp"
#include "ucd/provider.hpp"
#include "ucd/verify.hpp"

namespace ucd {

// A provider together with the vocabulary needed to encode text for it.
struct LoadedProvider {
  ProviderPtr provider;
  Vocab vocab;
};

// Resolves provider specs, loading each distinct spec once so that equal
// specs share one provider object.
class ProviderLoader {
 public:
  explicit ProviderLoader(int timeout_ms = 5000) : timeout_ms_(timeout_ms) {}
  const LoadedProvider& get(const std::string& spec);

 private:
  int timeout_ms_;
  std::map<std::string, LoadedProvider> cache_;
};

void cmd_bench_gen(const BenchSpec& spec, const std::filesystem::path& out_dir);

void cmd_train(const std::filesystem::path& corpus, const std::filesystem::path& vocab, int order, double k,
               const std::filesystem::path& out);

// Decoded continuation of `prompt` under cfg's first alpha.
std::string cmd_generate(const RunConfig& cfg, const std::string& prompt);

struct EvalRow {
  double alpha = 0.0;
  EvalReport report;
};

struct EvalResult {
  std::vector<EvalRow> rows;  // grid order
  std::size_t selected = 0;   // index into rows
  std::vector<nlohmann::ordered_json> report_files;
  nlohmann::ordered_json summary;
};

// Among grid points whose utility is at least 95% of the grid maximum, the
// one with the highest forget quality; ties go to the earlier grid point.
std::size_t select_alpha(const std::vector<EvalRow>& rows);

// Evaluates every alpha in the grid and, when cfg.output is set, writes one
// report per alpha plus summary.json into that directory.
EvalResult cmd_eval(const RunConfig& cfg);

std::string report_file_name(ComposeMode mode, double alpha);

// Throws a data error describing the first schema problem.
void validate_eval_report_json(const nlohmann::json& j);

nlohmann::ordered_json cmd_verify(const VerifyOptions& opt);

// Blocks serving `model_path` until the process is stopped.
void cmd_serve(const std::filesystem::path& model_path, const std::string& host, int port);

}  // namespace ucd
