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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bench_fixture.hpp"
#include "ucd/commands.hpp"
#include "ucd/compose.hpp"
#include "ucd/metrics.hpp"
#include "ucd/ngram.hpp"
#include "ucd/remote.hpp"
#include "ucd/sample.hpp"
#include "ucd/verify.hpp"

using namespace ucd;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

Eigen::VectorXd random_logits(std::mt19937_64& gen, Eigen::Index n, double scale = 3.0) {
  std::normal_distribution<double> d(0.0, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- oracles

// sup_t |F_x(t) - F_y(t)| over every sample point, O(nm).
double brute_ks(const std::vector<double>& x, const std::vector<double>& y) {
  const auto cdf = [](const std::vector<double>& s, double t) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v <= t; }));
  };
  double d = 0.0;
  for (const auto* s : {&x, &y}) {
    for (double t : *s) {
      d = std::max(d, std::abs(cdf(x, t) / static_cast<double>(x.size()) - cdf(y, t) / static_cast<double>(y.size())));
    }
  }
  return d;
}

// LCS by enumerating every subsequence of `a`.
std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t j = 0, len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) {
        ok = false;
      } else {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

// Top-p truncated distribution over the full vocabulary (zeros outside).
std::vector<double> truncated(const std::vector<double>& probs, double p) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return probs[a] > probs[b]; });
  std::vector<double> out(probs.size(), 0.0);
  double mass = 0.0;
  for (auto id : order) {
    out[id] = probs[id];
    mass += probs[id];
    if (mass >= p) break;
  }
  for (auto& q : out) q /= mass;
  return out;
}

// --------------------------------------------------------------- criteria

Outcome exact_recovery() {
  Outcome o;
  const auto t0 = Clock::now();
  const Eigen::Index sizes[] = {10, 1000};
  const double ms[] = {0.5, 1.0, 2.0};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto n = sizes[i % 2];
    const double m = ms[(i / 2) % 3];
    const auto fam = random_family(n, m, 1000 + static_cast<std::uint64_t>(i));
    worst = std::max(worst, verify_prop2(fam));
  }
  const double secs = seconds_since(t0);
  o.require(worst < 1e-9, fmt("max TV %.3g >= 1e-9", worst));
  o.require(secs < 10.0, fmt("took %.2f s", secs));
  if (o.ok) o.detail = fmt("100 families, max TV %.3g, %.2f s", worst, secs);
  return o;
}

Outcome identities() {
  Outcome o;
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> vsize(2, 64);
  std::uniform_real_distribution<double> alpha(0.0, 3.0), shift(-50.0, 50.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = vsize(gen);
    const auto p = random_logits(gen, n), f = random_logits(gen, n), c = random_logits(gen, n);
    const auto ref = softmax(p);
    const ComposeConfig cfg{alpha(gen), i % 2 ? ComposeMode::kUcs : ComposeMode::kUcd};

    const double at_zero = max_abs_diff(softmax(compose(p, f, c, {0.0, cfg.mode})), ref);
    const double same_aux = max_abs_diff(softmax(compose(p, f, f, cfg)), ref);
    const auto base = softmax(compose(p, f, c, {cfg.alpha, ComposeMode::kUcd}));
    const Eigen::VectorXd ps = p.array() + shift(gen), fs = f.array() + shift(gen), cs = c.array() + shift(gen);
    const double shifted = std::max({max_abs_diff(softmax(compose(ps, f, c, {cfg.alpha, ComposeMode::kUcd})), base),
                                     max_abs_diff(softmax(compose(p, fs, c, {cfg.alpha, ComposeMode::kUcd})), base),
                                     max_abs_diff(softmax(compose(p, f, cs, {cfg.alpha, ComposeMode::kUcd})), base),
                                     max_abs_diff(softmax(compose(ps, fs, cs, {cfg.alpha, ComposeMode::kUcd})), base)});
    o.require(at_zero <= 1e-12, fmt("case %g: alpha = 0 differs by %.3g", i, at_zero));
    o.require(same_aux <= 1e-12, fmt("case %g: equal auxiliaries differ by %.3g", i, same_aux));
    o.require(shifted <= 1e-12, fmt("case %g: shifted inputs differ by %.3g", i, shifted));
    worst = std::max({worst, at_zero, same_aux, shifted});
  }
  if (o.ok) o.detail = fmt("1000 cases, max deviation %.3g", worst);
  return o;
}

Outcome oracles() {
  Outcome o;
  std::mt19937_64 gen(3);

  std::uniform_int_distribution<int> size(1, 50), coarse(0, 9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x(static_cast<std::size_t>(size(gen))), y(static_cast<std::size_t>(size(gen)));
    const bool ties = t % 2 == 0;
    for (auto& v : x) v = ties ? coarse(gen) : normal(gen);
    for (auto& v : y) v = ties ? coarse(gen) : normal(gen) + 0.3;
    const double got = ks_two_sample(x, y).statistic, want = brute_ks(x, y);
    o.require(got == want, fmt("KS pair %g: %.17g vs %.17g", t, got, want));
  }

  std::uniform_int_distribution<int> len(0, 8), len1(1, 8), tok(0, 3);
  const auto words = [&](int n) {
    std::vector<std::string> w;
    for (int i = 0; i < n; ++i) w.push_back(std::string(1, static_cast<char>('a' + tok(gen))));
    return w;
  };
  for (int t = 0; t < 500; ++t) {
    const auto cand = words(len(gen)), ref = words(len1(gen));
    const double got = rouge_l_recall(cand, ref);
    const double want = static_cast<double>(brute_lcs(cand, ref)) / static_cast<double>(ref.size());
    o.require(got == want, fmt("ROUGE pair %g: %.17g vs %.17g", t, got, want));
  }

  const int draws = 10000;
  std::uniform_real_distribution<double> top_p(0.3, 1.0);
  double worst_z = 0.0;
  for (int t = 0; t < 5; ++t) {
    const auto logits = random_logits(gen, 12, 1.5);
    const auto lp = log_softmax(logits);
    std::vector<double> probs(static_cast<std::size_t>(lp.size()));
    for (Eigen::Index i = 0; i < lp.size(); ++i) probs[static_cast<std::size_t>(i)] = std::exp(lp[i]);
    const double p = t == 0 ? 1.0 : top_p(gen);
    const auto q = truncated(probs, p);
    Rng rng(700 + static_cast<std::uint64_t>(t));
    std::vector<int> hits(probs.size(), 0);
    for (int d = 0; d < draws; ++d) ++hits[static_cast<std::size_t>(nucleus_pick(lp, p, rng))];
    for (std::size_t y = 0; y < probs.size(); ++y) {
      const double sigma = std::sqrt(draws * q[y] * (1 - q[y]));
      const double dev = std::abs(hits[y] - draws * q[y]);
      if (q[y] == 0.0) {
        o.require(hits[y] == 0, fmt("nucleus drew a truncated token %g times", hits[y]));
      } else {
        o.require(dev <= 3 * sigma, fmt("nucleus token off by %.2f sigma", dev / sigma));
        worst_z = std::max(worst_z, dev / sigma);
      }
    }
  }
  if (o.ok) o.detail = fmt("500 KS pairs, 500 ROUGE pairs exact; nucleus max %.2f sigma", worst_z);
  return o;
}

Outcome remote_fidelity(const testing::BenchFixture& fx) {
  Outcome o;
  ProviderLoader loader;
  const auto& ref = loader.get(fx.full);
  const auto& forget = loader.get(fx.forget);
  const auto& clean = loader.get(fx.retain);
  LogitServer s1(ref.provider, ref.vocab), s2(forget.provider, ref.vocab), s3(clean.provider, ref.vocab);
  s1.start("127.0.0.1", 0);
  s2.start("127.0.0.1", 0);
  s3.start("127.0.0.1", 0);
  RemoteProvider r1({s1.url(), 5000, ref.vocab.hash()}), r2({s2.url(), 5000, ref.vocab.hash()}),
      r3({s3.url(), 5000, ref.vocab.hash()});

  const auto sets = read_eval_sets(fx.dir / "bench" / "eval_sets.jsonl");
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<TokenId> tok(2, static_cast<TokenId>(ref.vocab.size()) - 1);
  std::uniform_int_distribution<int> len(1, 6);
  const SamplerConfig greedy{Strategy::kGreedy, std::nullopt, 0, 12};
  std::size_t compared = 0;
  for (int i = 0; i < 50; ++i) {
    Context prompt = Context::prompt(ref.vocab, std::string_view{});
    if (i % 2 == 0) {
      const auto& q = (i % 4 == 0 ? sets.forget : sets.retain)[static_cast<std::size_t>(i) % sets.forget.size()];
      prompt = Context::prompt(ref.vocab, tokenize(q.question));
    } else {
      std::vector<TokenId> ids{Vocab::kBos};
      for (int k = len(gen); k > 0; --k) ids.push_back(tok(gen));
      prompt = Context(ids, ref.vocab.size());
    }
    const ComposeConfig cfg{i % 3 == 0 ? 1.0 : 0.1 * (i % 10), i % 5 == 0 ? ComposeMode::kUcs : ComposeMode::kUcd};
    const auto local = generate(*ref.provider, *forget.provider, *clean.provider, cfg, greedy, prompt);
    const auto wire = generate(r1, r2, r3, cfg, greedy, prompt);
    o.require(local.continuation == wire.continuation, fmt("prompt %g: token sequences differ", i));
    o.require(local.logprobs == wire.logprobs, fmt("prompt %g: step log-probabilities differ", i));

    for (const auto& [local_p, remote_p] : {std::pair<const LogitProvider*, const LogitProvider*>{ref.provider.get(), &r1},
                                            {forget.provider.get(), &r2},
                                            {clean.provider.get(), &r3}}) {
      const auto a = local_p->logits(prompt);
      const auto b = remote_p->logits(prompt);
      o.require(a.size() == b.size() && a == b, fmt("prompt %g: remote logits are not bit-identical", i));
      compared += static_cast<std::size_t>(a.size());
    }
  }
  if (o.ok) o.detail = "50 prompts, greedy tokens identical, " + std::to_string(compared) + " logits bit-identical";
  return o;
}

struct BenchRuns {
  EvalResult reference, retrain, ucd;
  double reference_secs = 0, retrain_secs = 0, ucd_secs = 0;
};

BenchRuns run_benchmark(const testing::BenchFixture& fx) {
  BenchRuns r;
  const int threads = static_cast<int>(std::max(1u, std::min(4u, std::thread::hardware_concurrency())));

  auto cfg = fx.run_config("acceptance_reference");
  cfg.mode = ComposeMode::kReferenceOnly;
  auto t0 = Clock::now();
  r.reference = cmd_eval(cfg);
  r.reference_secs = seconds_since(t0);

  cfg = fx.run_config("acceptance_retrain");
  cfg.mode = ComposeMode::kReferenceOnly;
  cfg.providers.reference = *cfg.providers.retrain;
  t0 = Clock::now();
  r.retrain = cmd_eval(cfg);
  r.retrain_secs = seconds_since(t0);

  cfg = fx.run_config("acceptance_ucd");
  cfg.alphas = {0.01, 0.1, 0.5, 1.0};
  cfg.eval.threads = threads;
  t0 = Clock::now();
  r.ucd = cmd_eval(cfg);
  r.ucd_secs = seconds_since(t0);
  return r;
}

Outcome forget_quality_crossing(const BenchRuns& r, double fixture_secs) {
  Outcome o;
  const auto& ref = r.reference.rows.front().report;
  std::optional<double> crossing;
  for (const auto& row : r.ucd.rows) {
    if (row.report.forget_quality_log_p >= kForgetQualityThreshold &&
        row.report.model_utility >= 0.9 * ref.model_utility && !crossing) {
      crossing = row.alpha;
    }
  }
  const double secs = fixture_secs + r.reference_secs + r.ucd_secs;
  o.require(ref.forget_quality_log_p < kForgetQualityThreshold,
            fmt("reference log p %.4g is not below ln(0.05)", ref.forget_quality_log_p));
  o.require(crossing.has_value(), "no alpha reaches ln(0.05) with utility >= 0.9 x reference");
  o.require(secs < 120.0, fmt("took %.1f s", secs));
  if (o.ok) {
    const auto& row = *std::find_if(r.ucd.rows.begin(), r.ucd.rows.end(), [&](auto& x) { return x.alpha == *crossing; });
    o.detail = fmt("reference log p %.4g; UCD alpha=%g log p %.4g", ref.forget_quality_log_p, *crossing,
                   row.report.forget_quality_log_p) +
               fmt(", utility %.4g vs reference %.4g", row.report.model_utility, ref.model_utility) +
               fmt(", %.1f s", secs);
  }
  return o;
}

Outcome memorization_gap(const BenchRuns& r, double fixture_secs) {
  Outcome o;
  const double ref = r.reference.rows.front().report.verb_mem_forget;
  const double retrain = r.retrain.rows.front().report.verb_mem_forget;
  const auto& selected = r.ucd.rows[r.ucd.selected];
  const double ucd = selected.report.verb_mem_forget;
  const double self_leak = r.retrain.rows.front().report.priv_leak;
  const double secs = fixture_secs + r.reference_secs + r.retrain_secs + r.ucd_secs;
  o.require(ref - retrain >= 30.0, fmt("VerbMem gap %.4g < 30", ref - retrain));
  o.require(std::abs(ucd - retrain) <= 10.0, fmt("|VerbMem(UCD) - VerbMem(retrain)| = %.4g > 10", std::abs(ucd - retrain)));
  o.require(self_leak == 0.0, fmt("retrain self priv_leak %.17g != 0", self_leak));
  o.require(secs < 120.0, fmt("took %.1f s", secs));
  if (o.ok) {
    o.detail = fmt("VerbMem reference %.4g, retrain %.4g, ", ref, retrain) +
               fmt("UCD alpha=%g %.4g; retrain self leak 0; %.1f s", selected.alpha, ucd, secs);
  }
  return o;
}

Outcome ucs_conservatism() {
  Outcome o;
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> vsize(2, 64);
  std::uniform_real_distribution<double> alpha(0.01, 3.0), shift(-20.0, 20.0);
  std::size_t clipped = 0, untouched = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = vsize(gen);
    const auto p = random_logits(gen, n), f = random_logits(gen, n), c = random_logits(gen, n);
    const double a = alpha(gen);
    const auto ucs = compose_unnormalized(p, f, c, {a, ComposeMode::kUcs});
    const auto ucd = compose_unnormalized(p, f, c, {a, ComposeMode::kUcd});
    const auto ref = log_softmax(p);
    const auto delta = contrastive_signal(f, c);
    for (Eigen::Index y = 0; y < n; ++y) {
      o.require(ucs[y] <= ref[y], fmt("triple %g: UCS raised token %g", i, static_cast<double>(y)));
      o.require((ucs[y] == ref[y]) == (delta[y] <= 0.0), fmt("triple %g: equality pattern wrong at %g", i, static_cast<double>(y)));
      if (delta[y] >= 0.0) {
        o.require(std::abs(ucs[y] - ucd[y]) <= 1e-12 * std::max(1.0, std::abs(ucd[y])),
                  fmt("triple %g: UCS and UCD differ at a nonnegative-signal token", i));
      }
      (delta[y] <= 0.0 ? untouched : clipped)++;
    }

    // A forget auxiliary equal to the clean one up to a constant has a
    // nonnegative signal everywhere; both rules then coincide.
    const Eigen::VectorXd f0 = c.array() + shift(gen);
    const auto d0 = contrastive_signal(f0, c);
    const Eigen::VectorXd nonneg = d0.cwiseMax(0.0);
    o.require(apply_signal(ref, nonneg, {a, ComposeMode::kUcs}) == apply_signal(ref, nonneg, {a, ComposeMode::kUcd}),
              fmt("triple %g: UCS != UCD for a nonnegative signal", i));
    const double diff = max_abs_diff(softmax(compose(p, f0, c, {a, ComposeMode::kUcs})),
                                     softmax(compose(p, f0, c, {a, ComposeMode::kUcd})));
    o.require(diff <= 1e-12, fmt("triple %g: shifted-auxiliary outputs differ by %.3g", i, diff));
  }
  if (o.ok) {
    o.detail = "1000 triples, " + std::to_string(clipped) + " suppressed and " + std::to_string(untouched) +
               " untouched tokens";
  }
  return o;
}

Outcome approximate_clean(const testing::BenchFixture& fx) {
  Outcome o;
  std::vector<std::string> produced;
  for (const auto& clean : {fx.retain, "mix:0.5:" + fx.retain + "," + fx.full}) {
    auto cfg = fx.run_config(produced.empty() ? "acceptance_clean_exact" : "acceptance_clean_mix");
    cfg.providers.clean = clean;
    cfg.alphas = {0.1, 1.0};
    const auto r = cmd_eval(cfg);
    for (double a : cfg.alphas) {
      const auto path = std::filesystem::path(cfg.output) / report_file_name(cfg.mode, a);
      std::ifstream in(path);
      validate_eval_report_json(nlohmann::json::parse(in));
    }
    validate_eval_report_json(nlohmann::json(r.report_files.back()));
    produced.push_back(fmt("%.4g", r.rows.back().report.forget_quality_log_p));
  }
  o.detail = "both runs wrote valid reports; alpha=1 log p " + produced[0] + " (retain clean) vs " + produced[1] +
             " (mixture clean)";
  return o;
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("threw: ") + e.what();
    }
    if (!o.ok) ++failed;
    std::printf("criterion %d %s: %s (%s)\n", id, name, o.ok ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "exact recovery", exact_recovery);
  report(2, "identities", identities);
  report(3, "oracle equivalence", oracles);

  const auto t0 = Clock::now();
  std::optional<testing::BenchFixture> fx;
  std::string fixture_error;
  try {
    fx = testing::make_bench_fixture("acceptance", {40, 10, 0.10, 0});
  } catch (const std::exception& e) {
    fixture_error = e.what();
  }
  const double fixture_secs = seconds_since(t0);
  const auto need_fixture = [&]() -> const testing::BenchFixture& {
    if (!fx) throw std::runtime_error("benchmark setup failed: " + fixture_error);
    return *fx;
  };

  report(4, "remote fidelity", [&] { return remote_fidelity(need_fixture()); });

  std::optional<BenchRuns> runs;
  const auto need_runs = [&]() -> const BenchRuns& {
    if (!runs) runs = run_benchmark(need_fixture());
    return *runs;
  };
  report(5, "forget-quality crossing", [&] { return forget_quality_crossing(need_runs(), fixture_secs); });
  report(6, "memorization gap", [&] { return memorization_gap(need_runs(), fixture_secs); });
  report(7, "UCS conservatism", ucs_conservatism);
  report(8, "approximate clean model", [&] { return approximate_clean(need_fixture()); });

  std::printf("%s: %d of 8 criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
