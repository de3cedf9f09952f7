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

#include "ucd/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>

#include "ucd/compose.hpp"
#include "ucd/error.hpp"
#include "ucd/sample.hpp"

namespace ucd {

void EvalSets::validate() const {
  std::set<std::string> forget_q;
  for (const auto& ex : forget) forget_q.insert(ex.question);
  for (const auto& ex : retain) {
    if (forget_q.count(ex.question)) {
      fail(ErrorKind::kData, "question appears in both forget and retain sets: " + ex.question);
    }
  }
}

std::vector<std::string> rouge_tokens(std::string_view text) {
  auto words = tokenize(text);
  for (auto& w : words) {
    for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return words;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_recall(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (reference.empty()) fail(ErrorKind::kData, "ROUGE-L reference is empty");
  return static_cast<double>(lcs_length(candidate, reference)) / static_cast<double>(reference.size());
}

std::vector<double> conditional_logprobs(const LogitProvider& scorer, const Vocab& vocab,
                                         std::span<const std::string> prefix,
                                         std::span<const std::string> target) {
  if (scorer.vocab_hash() != vocab.hash()) {
    fail(ErrorKind::kData, "incompatible provider: vocab hash " + scorer.vocab_hash() + " != " + vocab.hash());
  }
  auto target_ids = vocab.encode(target);
  auto ctx = Context::prompt(vocab, prefix);
  std::vector<double> out;
  out.reserve(target_ids.size());
  for (TokenId id : target_ids) {
    const LogitVector lp = log_softmax(scorer.logits(ctx));
    out.push_back(lp[id]);
    ctx.push_back(id);
  }
  return out;
}

double answer_probability(const LogitProvider& scorer, const Vocab& vocab, const std::string& question,
                          const std::string& answer) {
  const auto answer_words = tokenize(answer);
  if (answer_words.empty()) fail(ErrorKind::kData, "answer is empty after tokenization");
  const auto lps = conditional_logprobs(scorer, vocab, tokenize(question), answer_words);
  double sum = 0.0;
  for (double lp : lps) sum += lp;
  return std::exp(sum / static_cast<double>(lps.size()));
}

double truth_ratio(const LogitProvider& scorer, const Vocab& vocab, const QAExample& ex) {
  if (ex.perturbed_answers.empty()) fail(ErrorKind::kData, "truth ratio needs a perturbed answer");
  double perturbed = 0.0;
  for (const auto& a : ex.perturbed_answers) perturbed += answer_probability(scorer, vocab, ex.question, a);
  perturbed /= static_cast<double>(ex.perturbed_answers.size());
  const double para = answer_probability(scorer, vocab, ex.question, ex.paraphrased_answer);
  if (!(para > 0.0)) fail(ErrorKind::kData, "paraphrased answer probability underflowed to zero");
  return perturbed / para;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j < 1000000; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return 2.0 * sum;
}

KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) fail(ErrorKind::kData, "KS test needs two nonempty samples");
  std::vector<double> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());

  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    double t;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      t = a[i];
    } else {
      t = b[j];
    }
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }

  KsResult r;
  r.statistic = d;
  if (d == 0.0) return r;
  const double ne = n * m / (n + m);
  const double root = std::sqrt(ne);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  r.p_value = std::clamp(kolmogorov_survival(lambda), std::numeric_limits<double>::min(), 1.0);
  return r;
}

double forget_quality(const LogitProvider& candidate, const LogitProvider& retrain, const Vocab& vocab,
                      std::span<const QAExample> forget_set) {
  if (forget_set.empty()) fail(ErrorKind::kData, "forget set is empty");
  require_same_vocab({&candidate, &retrain});
  std::vector<double> cand, ref;
  cand.reserve(forget_set.size());
  ref.reserve(forget_set.size());
  for (const auto& ex : forget_set) {
    cand.push_back(truth_ratio(candidate, vocab, ex));
    ref.push_back(truth_ratio(retrain, vocab, ex));
  }
  return std::log(ks_two_sample(cand, ref).p_value);
}

double model_utility(std::span<const double> components) {
  if (components.empty()) fail(ErrorKind::kData, "model utility needs at least one component");
  double inv = 0.0;
  for (double c : components) {
    if (!(c >= 0.0)) fail(ErrorKind::kData, "model utility components must be nonnegative");
    if (c == 0.0) return 0.0;
    inv += 1.0 / c;
  }
  return static_cast<double>(components.size()) / inv;
}

namespace {

std::vector<std::string> greedy_words(const LogitProvider& model, const Vocab& vocab,
                                      std::span<const std::string> prompt, std::size_t max_tokens) {
  SamplerConfig greedy{Strategy::kGreedy, std::nullopt, 0, static_cast<int>(max_tokens)};
  auto g = generate(model, greedy, Context::prompt(vocab, prompt));
  return rouge_tokens(vocab.decode(g.continuation));
}

double answer_rouge(const LogitProvider& model, const Vocab& vocab, const QAExample& ex) {
  const auto gold = rouge_tokens(ex.gold_answer);
  const auto answer = greedy_words(model, vocab, tokenize(ex.question), gold.size());
  return rouge_l_recall(answer, gold);
}

}  // namespace

double verb_mem(const LogitProvider& model, const Vocab& vocab, std::span<const ContinuationProbe> probes) {
  if (probes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : probes) {
    if (p.continuation.empty()) fail(ErrorKind::kData, "verbatim probe has an empty continuation");
    std::vector<std::string> truth;
    for (const auto& w : p.continuation) {
      auto t = rouge_tokens(w);
      truth.insert(truth.end(), t.begin(), t.end());
    }
    const auto out = greedy_words(model, vocab, p.prefix, p.continuation.size());
    sum += rouge_l_recall(out, truth);
  }
  return 100.0 * sum / static_cast<double>(probes.size());
}

double know_mem(const LogitProvider& model, const Vocab& vocab, std::span<const QAExample> qa) {
  if (qa.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : qa) sum += answer_rouge(model, vocab, ex);
  return 100.0 * sum / static_cast<double>(qa.size());
}

double min_k_of(std::span<const double> token_logprobs, double k_frac) {
  if (token_logprobs.empty()) fail(ErrorKind::kData, "min-k needs a nonempty sequence");
  if (!(k_frac > 0.0 && k_frac <= 1.0)) fail(ErrorKind::kUsage, "k fraction must be in (0, 1]");
  std::vector<double> v(token_logprobs.begin(), token_logprobs.end());
  std::sort(v.begin(), v.end());
  const auto take = std::min(
      v.size(), static_cast<std::size_t>(std::ceil(k_frac * static_cast<double>(v.size()) - 1e-12)));
  double sum = 0.0;
  for (std::size_t i = 0; i < std::max<std::size_t>(take, 1); ++i) sum += v[i];
  return sum / static_cast<double>(std::max<std::size_t>(take, 1));
}

double min_k_logprob(const LogitProvider& scorer, const Vocab& vocab, std::span<const std::string> text,
                     double k_frac) {
  if (text.empty()) fail(ErrorKind::kData, "min-k needs a nonempty sequence");
  return min_k_of(conditional_logprobs(scorer, vocab, {}, text), k_frac);
}

double auc(std::span<const double> member_scores, std::span<const double> nonmember_scores) {
  if (member_scores.empty() || nonmember_scores.empty()) fail(ErrorKind::kData, "AUC needs two nonempty score lists");
  double wins = 0.0;
  for (double m : member_scores) {
    for (double n : nonmember_scores) {
      if (m > n) {
        wins += 1.0;
      } else if (m == n) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(member_scores.size()) * static_cast<double>(nonmember_scores.size()));
}

double priv_leak(double auc_unlearned, double auc_retrain) {
  if (!(auc_retrain > 0.0)) fail(ErrorKind::kData, "retrain AUC must be positive");
  return 100.0 * (auc_unlearned - auc_retrain) / auc_retrain;
}

ContinuationProbe make_probe(std::span<const std::string> words, double prefix_fraction) {
  if (words.size() < 2) fail(ErrorKind::kData, "a verbatim probe needs at least two tokens");
  auto cut = static_cast<std::size_t>(std::floor(prefix_fraction * static_cast<double>(words.size())));
  cut = std::clamp<std::size_t>(cut, 1, words.size() - 1);
  return {{words.begin(), words.begin() + static_cast<std::ptrdiff_t>(cut)},
          {words.begin() + static_cast<std::ptrdiff_t>(cut), words.end()}};
}

namespace {

struct SetScores {
  SetMetrics metrics;
  double truth_utility = 0.0;  // mean of max(0, 1 - truth ratio)
};

SetScores score_set(const LogitProvider& model, const Vocab& vocab, std::span<const QAExample> qa) {
  SetScores s;
  if (qa.empty()) return s;
  for (const auto& ex : qa) {
    const double tr = truth_ratio(model, vocab, ex);
    s.metrics.rouge += answer_rouge(model, vocab, ex);
    s.metrics.probability += answer_probability(model, vocab, ex.question, ex.gold_answer);
    s.metrics.truth_ratio += tr;
    s.truth_utility += std::max(0.0, 1.0 - tr);
  }
  const auto n = static_cast<double>(qa.size());
  s.metrics.rouge /= n;
  s.metrics.probability /= n;
  s.metrics.truth_ratio /= n;
  s.truth_utility /= n;
  return s;
}

double membership_auc(const LogitProvider& model, const Vocab& vocab, const EvalInputs& in) {
  std::vector<double> mem, non;
  for (const auto& d : in.members) mem.push_back(min_k_logprob(model, vocab, d, in.min_k_fraction));
  for (const auto& d : in.nonmembers) non.push_back(min_k_logprob(model, vocab, d, in.min_k_fraction));
  return auc(mem, non);
}

}  // namespace

EvalReport evaluate(const EvalInputs& in) {
  if (!in.vocab || !in.candidate || !in.retrain || !in.sets) {
    fail(ErrorKind::kUsage, "evaluation needs a vocabulary, candidate, retrain model and eval sets");
  }
  const auto& vocab = *in.vocab;
  const auto& model = *in.candidate;
  const auto& sets = *in.sets;
  sets.validate();
  require_same_vocab({in.candidate, in.retrain});

  EvalReport r;
  r.forget_quality_log_p = forget_quality(model, *in.retrain, vocab, sets.forget);

  std::vector<double> utility;
  r.per_set["forget"] = score_set(model, vocab, sets.forget).metrics;
  const std::pair<const char*, const std::vector<QAExample>*> utility_sets[] = {
      {"retain", &sets.retain}, {"real_authors", &sets.real_authors}, {"real_world", &sets.real_world}};
  for (const auto& [name, qa] : utility_sets) {
    if (qa->empty()) continue;
    // Utility components per non-forget set: rouge, probability and the
    // clamped complement of the truth ratio.
    const auto s = score_set(model, vocab, *qa);
    utility.insert(utility.end(), {s.metrics.rouge, s.metrics.probability, s.truth_utility});
    r.per_set[name] = s.metrics;
  }
  r.model_utility = utility.empty() ? 0.0 : model_utility(utility);

  r.verb_mem_forget = verb_mem(model, vocab, in.verbatim_probes);
  r.know_mem_forget = 100.0 * r.per_set["forget"].rouge;
  r.know_mem_retain = r.per_set.count("retain") ? 100.0 * r.per_set["retain"].rouge : 0.0;

  if (!in.members.empty() && !in.nonmembers.empty()) {
    const double auc_model = membership_auc(model, vocab, in);
    const double auc_retrain = in.candidate == in.retrain ? auc_model : membership_auc(*in.retrain, vocab, in);
    r.priv_leak = priv_leak(auc_model, auc_retrain);
  }
  return r;
}

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["forget_quality_log_p"] = round_significant(r.forget_quality_log_p);
  j["model_utility"] = round_significant(r.model_utility);
  j["verb_mem_forget"] = round_significant(r.verb_mem_forget);
  j["know_mem_forget"] = round_significant(r.know_mem_forget);
  j["know_mem_retain"] = round_significant(r.know_mem_retain);
  j["priv_leak"] = round_significant(r.priv_leak);
  nlohmann::ordered_json sets = nlohmann::ordered_json::object();
  for (const auto& [name, m] : r.per_set) {
    sets[name] = {{"rouge", round_significant(m.rouge)},
                  {"probability", round_significant(m.probability)},
                  {"truth_ratio", round_significant(m.truth_ratio)}};
  }
  j["per_set"] = std::move(sets);
  return j;
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.forget_quality_log_p = j.at("forget_quality_log_p").get<double>();
    r.model_utility = j.at("model_utility").get<double>();
    r.verb_mem_forget = j.at("verb_mem_forget").get<double>();
    r.know_mem_forget = j.at("know_mem_forget").get<double>();
    r.know_mem_retain = j.at("know_mem_retain").get<double>();
    r.priv_leak = j.at("priv_leak").get<double>();
    for (const auto& [name, m] : j.at("per_set").items()) {
      r.per_set[name] = {m.at("rouge").get<double>(), m.at("probability").get<double>(),
                         m.at("truth_ratio").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, std::string("malformed eval report: ") + e.what());
  }
  return r;
}

}  // namespace ucd
