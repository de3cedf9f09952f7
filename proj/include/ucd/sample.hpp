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
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ucd/compose.hpp"
#include "ucd/provider.hpp"
#include "ucd/vocab.hpp"

namespace ucd {

// Seeded generator: std::mt19937_64 (its output sequence is fixed by the C++
// standard) with uniforms built from the top 53 bits, so draws do not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

enum class Strategy { kGreedy, kNucleus };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& text);

struct SamplerConfig {
  Strategy strategy = Strategy::kGreedy;
  std::optional<double> top_p;  // required iff strategy == kNucleus
  std::uint64_t seed = 0;
  int max_new_tokens = 32;

  void validate() const;
};

struct Generation {
  Context prompt;
  std::vector<TokenId> continuation;
  // Composed log-probability of each chosen token.
  std::vector<double> logprobs;
};

// Argmax, ties resolved toward the lowest id.
TokenId greedy_pick(const LogitVector& logprobs);

// Tokens kept by top-p filtering, most probable first (ties by ascending
// id), with probabilities renormalized over the kept set.
struct NucleusSupport {
  std::vector<TokenId> ids;
  std::vector<double> probs;
};

// Keeps the shortest prefix whose cumulative probability reaches p; the
// token that crosses the threshold is included.
NucleusSupport nucleus_support(const LogitVector& logprobs, double p);
TokenId nucleus_pick(const LogitVector& logprobs, double p, Rng& rng);

// Decodes from a single (possibly composed) provider.
Generation generate(const LogitProvider& model, const SamplerConfig& sampler, Context prompt);

// Queries all three providers at every step, composes and picks. Fails
// before the first step if the vocabularies disagree.
Generation generate(const LogitProvider& reference, const LogitProvider& forget,
                    const LogitProvider& clean, const ComposeConfig& compose_cfg,
                    const SamplerConfig& sampler, Context prompt);

}  // namespace ucd
