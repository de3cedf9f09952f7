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

#include "ucd/sample.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ucd/error.hpp"

namespace ucd {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) fail(ErrorKind::kInternal, "Rng::below(0)");
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::string to_string(Strategy s) { return s == Strategy::kGreedy ? "greedy" : "nucleus"; }

Strategy parse_strategy(const std::string& text) {
  if (text == "greedy") return Strategy::kGreedy;
  if (text == "nucleus" || text == "top_p" || text == "top-p") return Strategy::kNucleus;
  fail(ErrorKind::kUsage, "unknown sampling strategy '" + text + "'");
}

void SamplerConfig::validate() const {
  if (max_new_tokens < 0) fail(ErrorKind::kUsage, "max_new_tokens must be >= 0");
  if (strategy == Strategy::kNucleus) {
    if (!top_p) fail(ErrorKind::kUsage, "nucleus sampling requires top_p");
    if (!(*top_p > 0.0 && *top_p <= 1.0)) fail(ErrorKind::kUsage, "top_p must be in (0, 1]");
  } else if (top_p) {
    fail(ErrorKind::kUsage, "top_p is only meaningful for nucleus sampling");
  }
}

TokenId greedy_pick(const LogitVector& logprobs) {
  if (logprobs.size() == 0) fail(ErrorKind::kData, "greedy_pick on empty logits");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < logprobs.size(); ++i) {
    if (logprobs[i] > logprobs[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

NucleusSupport nucleus_support(const LogitVector& logprobs, double p) {
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorKind::kUsage, "top_p must be in (0, 1]");
  const Eigen::VectorXd probs = logprobs.array().exp().matrix();
  std::vector<TokenId> order(static_cast<std::size_t>(probs.size()));
  std::iota(order.begin(), order.end(), TokenId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](TokenId a, TokenId b) { return probs[a] > probs[b]; });

  NucleusSupport s;
  double cum = 0.0;
  for (TokenId id : order) {
    s.ids.push_back(id);
    s.probs.push_back(probs[id]);
    cum += probs[id];
    if (cum >= p) break;
  }
  for (auto& q : s.probs) q /= cum;
  return s;
}

TokenId nucleus_pick(const LogitVector& logprobs, double p, Rng& rng) {
  const auto s = nucleus_support(logprobs, p);
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < s.ids.size(); ++i) {
    cum += s.probs[i];
    if (u < cum) return s.ids[i];
  }
  return s.ids.back();
}

namespace {

Generation decode_loop(const std::function<LogitVector(const Context&)>& step_logits,
                       const SamplerConfig& sampler, Context prompt) {
  sampler.validate();
  Generation g{prompt, {}, {}};
  Rng rng(sampler.seed);
  Context running = std::move(prompt);
  for (int step = 0; step < sampler.max_new_tokens && !running.ended(); ++step) {
    LogitVector lp;
    try {
      lp = step_logits(running);
    } catch (const Error& e) {
      throw Error(e.kind(), "generation step " + std::to_string(step) + ": " + e.what());
    }
    const TokenId next = sampler.strategy == Strategy::kGreedy
                             ? greedy_pick(lp)
                             : nucleus_pick(lp, *sampler.top_p, rng);
    g.continuation.push_back(next);
    g.logprobs.push_back(lp[next]);
    running.push_back(next);
  }
  return g;
}

}  // namespace

Generation generate(const LogitProvider& model, const SamplerConfig& sampler, Context prompt) {
  return decode_loop([&](const Context& ctx) { return log_softmax(model.logits(ctx)); }, sampler,
                     std::move(prompt));
}

Generation generate(const LogitProvider& reference, const LogitProvider& forget,
                    const LogitProvider& clean, const ComposeConfig& compose_cfg,
                    const SamplerConfig& sampler, Context prompt) {
  compose_cfg.validate();
  require_same_vocab({&reference, &forget, &clean});
  if (compose_cfg.mode == ComposeMode::kReferenceOnly) return generate(reference, sampler, std::move(prompt));
  return decode_loop(
      [&](const Context& ctx) {
        return compose(reference.logits(ctx), forget.logits(ctx), clean.logits(ctx), compose_cfg);
      },
      sampler, std::move(prompt));
}

}  // namespace ucd
