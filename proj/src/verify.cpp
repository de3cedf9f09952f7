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

#include "ucd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ucd/compose.hpp"
#include "ucd/error.hpp"
#include "ucd/ngram.hpp"

namespace ucd {
namespace {

void require_distribution(const Eigen::VectorXd& p, const char* what) {
  if (p.size() == 0) fail(ErrorKind::kData, std::string(what) + " is empty");
  if (!(p.array() > 0.0).all() || !p.allFinite()) {
    fail(ErrorKind::kData, std::string(what) + " has a zero or invalid probability");
  }
  if (std::abs(p.sum() - 1.0) > 1e-12) fail(ErrorKind::kData, std::string(what) + " does not sum to 1");
}

}  // namespace

ProportionalFamily build_proportional_family(const Eigen::VectorXd& clean, const Eigen::VectorXd& corrupted,
                                             double m, const Eigen::VectorXd& base) {
  require_distribution(clean, "clean distribution");
  require_distribution(corrupted, "corrupted distribution");
  require_distribution(base, "base distribution");
  if (clean.size() != corrupted.size() || clean.size() != base.size()) fail(ErrorKind::kData, "vocab mismatch");
  if (!(m > 0.0) || !std::isfinite(m)) fail(ErrorKind::kUsage, "proportionality slope must be positive");

  ProportionalFamily fam{clean, corrupted, m, base, {}, base};
  const Eigen::VectorXd log_f = base.array().log() + m * (corrupted.array().log() - clean.array().log());
  fam.a_forget = softmax(log_f);
  return fam;
}

Eigen::VectorXd random_distribution(Eigen::Index n, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, scale);
  Eigen::VectorXd logits(n);
  for (auto& x : logits) x = d(gen);
  return softmax(logits);
}

ProportionalFamily random_family(Eigen::Index n, double m, std::uint64_t seed) {
  std::mt19937_64 seeds(seed);
  const auto clean = random_distribution(n, seeds());
  const auto corrupted = random_distribution(n, seeds());
  const auto base = random_distribution(n, seeds());
  return build_proportional_family(clean, corrupted, m, base);
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) fail(ErrorKind::kData, "vocab mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

double verify_prop2(const ProportionalFamily& fam) { return verify_prop2(fam, 1.0 / fam.m); }

double verify_prop2(const ProportionalFamily& fam, double alpha) {
  const Eigen::VectorXd p = fam.corrupted.array().log();
  const Eigen::VectorXd f = fam.a_forget.array().log();
  const Eigen::VectorXd c = fam.a_clean.array().log();
  const Eigen::VectorXd aligned = softmax(compose(p, f, c, {alpha, ComposeMode::kUcd}));
  return total_variation(aligned, fam.clean);
}

void RatioBand::validate() const {
  if (!(c1 > 0.0 && c1 <= c2) || !std::isfinite(c2)) fail(ErrorKind::kUsage, "band needs 0 < c1 <= c2");
  // Relative slack so that alpha = 1/c computed in floating point is accepted.
  const double lo = 1.0 / c2, hi = 1.0 / c1;
  if (!(alpha >= lo * (1 - 1e-12) && alpha <= hi * (1 + 1e-12))) {
    fail(ErrorKind::kUsage, "alpha must lie in [1/c2, 1/c1]");
  }
}

BandReport verify_approx_band(const Eigen::VectorXd& corrupted, const Eigen::VectorXd& clean,
                              const Eigen::VectorXd& a_forget, const Eigen::VectorXd& a_clean,
                              const RatioBand& band) {
  band.validate();
  for (const auto* d : {&corrupted, &clean, &a_forget, &a_clean}) {
    if (d->size() != clean.size()) fail(ErrorKind::kData, "vocab mismatch");
  }
  require_distribution(corrupted, "corrupted distribution");
  require_distribution(clean, "clean distribution");
  require_distribution(a_forget, "forget auxiliary");
  require_distribution(a_clean, "clean auxiliary");

  const Eigen::VectorXd lp = corrupted.array().log();
  const Eigen::VectorXd lc = clean.array().log();
  const Eigen::VectorXd lf = a_forget.array().log();
  const Eigen::VectorXd la = a_clean.array().log();
  const Eigen::VectorXd aligned = compose_unnormalized(lp, lf, la, {band.alpha, ComposeMode::kUcd});

  BandReport r;
  r.worst_slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index y = 0; y < lp.size(); ++y) {
    const double g = lp[y] - lc[y];
    if (g < kGapEpsilon) continue;
    const double ratio = (lf[y] - la[y]) / g;
    if (ratio < band.c1 - kBandTolerance || ratio > band.c2 + kBandTolerance) {
      fail(ErrorKind::kData, "band violated at token " + std::to_string(y) + ": ratio " + std::to_string(ratio) +
                                 " outside [" + std::to_string(band.c1) + ", " + std::to_string(band.c2) + "]");
    }
    const double lower = -(band.c2 / band.c1 - 1.0) * g;
    const double upper = (1.0 - band.c1 / band.c2) * g;
    const double value = aligned[y] - lc[y];
    const double slack = std::min(value - lower, upper - value);
    r.tokens.push_back(y);
    r.lower.push_back(lower);
    r.value.push_back(value);
    r.upper.push_back(upper);
    r.worst_slack = std::min(r.worst_slack, slack);
    if (slack < -kBandTolerance) ++r.violations;
    ++r.checked;
  }
  if (r.checked == 0) r.worst_slack = 0.0;
  return r;
}

BandInstance random_band_instance(Eigen::Index n, double c1, double c2, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  BandInstance b;
  b.corrupted = random_distribution(n, gen());
  b.clean = random_distribution(n, gen());
  const Eigen::VectorXd base = random_distribution(n, gen());
  const Eigen::VectorXd g = b.corrupted.array().log() - b.clean.array().log();

  // Qualifying tokens get an exact log-ratio r in [c1, c2]; the rest absorb
  // whatever mass keeps both auxiliaries normalized.
  std::uniform_real_distribution<double> ratio(c1, c2);
  Eigen::VectorXd lift = Eigen::VectorXd::Ones(n);
  Eigen::Array<bool, Eigen::Dynamic, 1> q(n);
  double in_base = 0.0, in_lifted = 0.0, out_base = 0.0;
  for (Eigen::Index y = 0; y < n; ++y) {
    q[y] = g[y] >= kGapEpsilon;
    if (q[y]) {
      lift[y] = std::exp(ratio(gen) * g[y]);
      in_base += base[y];
      in_lifted += base[y] * lift[y];
    } else {
      out_base += base[y];
    }
  }
  if (out_base == 0.0) fail(ErrorKind::kInternal, "band instance needs a token with a negative gap");
  const double t = 0.5 / std::max(in_base, in_lifted);
  b.a_clean.resize(n);
  b.a_forget.resize(n);
  for (Eigen::Index y = 0; y < n; ++y) {
    if (q[y]) {
      b.a_clean[y] = base[y] * t;
      b.a_forget[y] = base[y] * t * lift[y];
    } else {
      b.a_clean[y] = base[y] * (1.0 - t * in_base) / out_base;
      b.a_forget[y] = base[y] * (1.0 - t * in_lifted) / out_base;
    }
  }
  return b;
}

std::vector<SpreadStats> delta_spread(const LogitProvider& f_prov, const LogitProvider& c_prov,
                                      const std::vector<Context>& prompts) {
  require_same_vocab({&f_prov, &c_prov});
  std::vector<SpreadStats> out;
  out.reserve(prompts.size());
  for (const auto& ctx : prompts) {
    const Eigen::VectorXd d = contrastive_signal(f_prov.logits(ctx), c_prov.logits(ctx));
    SpreadStats s;
    s.span = d.maxCoeff() - d.minCoeff();
    s.variance = (d.array() - d.mean()).square().mean();
    out.push_back(s);
  }
  return out;
}

double median(std::vector<double> xs) {
  if (xs.empty()) fail(ErrorKind::kData, "median of an empty list");
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

nlohmann::ordered_json run_verification(const VerifyOptions& opt) {
  if (opt.families < 0 || opt.band_instances < 0) fail(ErrorKind::kUsage, "counts must be nonnegative");
  std::mt19937_64 seeds(opt.seed);
  const Eigen::Index sizes[] = {10, 1000};
  const double slopes[] = {0.5, 1.0, 2.0};

  double max_tv = 0.0;
  for (int i = 0; i < opt.families; ++i) {
    const auto n = sizes[i % 2];
    const double m = slopes[(i / 2) % 3];
    max_tv = std::max(max_tv, verify_prop2(random_family(n, m, seeds())));
  }

  std::size_t band_violations = 0, band_checked = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < opt.band_instances; ++i) {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    double c1 = u(seeds), c2 = u(seeds);
    if (c1 > c2) std::swap(c1, c2);
    const double alpha = std::uniform_real_distribution<double>(1.0 / c2, 1.0 / c1)(seeds);
    const auto inst = random_band_instance(sizes[i % 2], c1, c2, seeds());
    const auto r = verify_approx_band(inst.corrupted, inst.clean, inst.a_forget, inst.a_clean, {c1, c2, alpha});
    band_violations += r.violations;
    band_checked += r.checked;
    if (r.checked) worst_slack = std::min(worst_slack, r.worst_slack);
  }

  // Signal spread on question prompts of a generated benchmark.
  const auto ds = gen_benchmark(opt.bench);
  const auto train = [&](const std::vector<Document>& docs) {
    return NGramModel::train(ds.vocab, encode_corpus(ds.vocab, docs), 3, 0.01);
  };
  const auto reference = train(ds.full);
  const auto forget_aux = train(ds.forget);
  const auto clean_aux = train(ds.retain);
  const auto prompts = [&](const std::vector<QAExample>& qa) {
    std::vector<Context> out;
    for (const auto& ex : qa) out.push_back(Context::prompt(ds.vocab, tokenize(ex.question)));
    return out;
  };
  const auto forget_prompts = prompts(ds.sets.forget);
  const auto retain_prompts = prompts(ds.sets.retain);

  nlohmann::ordered_json spread;
  const std::pair<const char*, const NGramModel*> pairs[] = {{"reference_vs_clean", &reference},
                                                             {"forget_vs_clean", &forget_aux}};
  for (const auto& [name, model] : pairs) {
    nlohmann::ordered_json entry;
    for (const auto& [which, ps] : {std::pair{"retain", &retain_prompts}, std::pair{"forget", &forget_prompts}}) {
      std::vector<double> spans, vars;
      for (const auto& s : delta_spread(*model, clean_aux, *ps)) {
        spans.push_back(s.span);
        vars.push_back(s.variance);
      }
      entry[which] = {{"prompts", ps->size()}, {"median_span", median(spans)}, {"median_variance", median(vars)}};
    }
    spread[name] = std::move(entry);
  }

  nlohmann::ordered_json j;
  j["families"] = opt.families;
  j["max_tv"] = max_tv;
  j["band_instances"] = opt.band_instances;
  j["band_tokens_checked"] = band_checked;
  j["band_violations"] = band_violations;
  j["band_worst_slack"] = band_checked ? worst_slack : 0.0;
  j["delta_spread_summary"] = std::move(spread);
  return j;
}

}  // namespace ucd
