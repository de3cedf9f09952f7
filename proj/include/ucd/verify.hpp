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
#include <string>
#include <vector>

#include "json.hpp"
#include "ucd/benchgen.hpp"
#include "ucd/provider.hpp"

namespace ucd {

// A reference/clean pair together with auxiliaries whose log-ratio is exactly
// m times the reference/clean log-ratio, up to one additive constant.
struct ProportionalFamily {
  Eigen::VectorXd clean;
  Eigen::VectorXd corrupted;
  double m = 1.0;
  Eigen::VectorXd base;
  Eigen::VectorXd a_forget;
  Eigen::VectorXd a_clean;

  Eigen::Index vocab_size() const { return clean.size(); }
};

// A_clean = base, A_forget = normalize(base * (corrupted / clean)^m).
ProportionalFamily build_proportional_family(const Eigen::VectorXd& clean, const Eigen::VectorXd& corrupted,
                                             double m, const Eigen::VectorXd& base);

// Strictly positive random distribution from seeded Gaussian logits.
Eigen::VectorXd random_distribution(Eigen::Index n, std::uint64_t seed, double scale = 2.0);
ProportionalFamily random_family(Eigen::Index n, double m, std::uint64_t seed);

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// TV distance between the UCD output at alpha and the clean distribution.
// alpha defaults to 1/m, where the two must coincide.
double verify_prop2(const ProportionalFamily& fam);
double verify_prop2(const ProportionalFamily& fam, double alpha);

struct RatioBand {
  double c1 = 1.0;
  double c2 = 1.0;
  double alpha = 1.0;

  // Throws unless 0 < c1 <= c2 and alpha lies in [1/c2, 1/c1].
  void validate() const;
};

// Gaps below this are treated as zero and skip the band check.
inline constexpr double kGapEpsilon = 1e-9;
// Slack below -kBandTolerance counts as a violation of the logit bounds; the
// same tolerance applies to the ratio check.
inline constexpr double kBandTolerance = 1e-9;

struct BandReport {
  std::size_t checked = 0;           // tokens with gap >= kGapEpsilon
  double worst_slack = 0.0;          // min distance to the nearer bound
  std::size_t violations = 0;        // tokens with slack < -kBandTolerance
  std::vector<Eigen::Index> tokens;  // checked token ids
  std::vector<double> lower, value, upper;
};

// For every token with gap g = log corrupted - log clean >= kGapEpsilon the
// pre-renormalization aligned logit minus log clean must lie in
// [-(c2/c1 - 1) g, (1 - c1/c2) g]. Throws "band violated" when a qualifying
// token's log-ratio falls outside [c1, c2].
BandReport verify_approx_band(const Eigen::VectorXd& corrupted, const Eigen::VectorXd& clean,
                              const Eigen::VectorXd& a_forget, const Eigen::VectorXd& a_clean,
                              const RatioBand& band);

// Distributions whose qualifying tokens have log-ratios drawn inside [c1, c2].
struct BandInstance {
  Eigen::VectorXd corrupted, clean, a_forget, a_clean;
};
BandInstance random_band_instance(Eigen::Index n, double c1, double c2, std::uint64_t seed);

struct SpreadStats {
  double span = 0.0;      // max - min of the contrastive signal
  double variance = 0.0;  // population variance over the vocabulary
};

std::vector<SpreadStats> delta_spread(const LogitProvider& f_prov, const LogitProvider& c_prov,
                                      const std::vector<Context>& prompts);

double median(std::vector<double> xs);

struct VerifyOptions {
  std::uint64_t seed = 0;
  int families = 100;
  int band_instances = 100;
  BenchSpec bench;  // used for the signal-spread diagnostic
};

// Runs random proportional families, random band instances and the
// signal-spread diagnostic on a generated benchmark.
nlohmann::ordered_json run_verification(const VerifyOptions& opt);

}  // namespace ucd
