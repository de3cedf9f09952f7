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

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ucd/provider.hpp"
#include "ucd/vocab.hpp"

namespace ucd {

struct QAExample {
  std::string question;
  std::string gold_answer;
  std::string paraphrased_answer;
  std::vector<std::string> perturbed_answers;

  friend bool operator==(const QAExample&, const QAExample&) = default;
};

struct EvalSets {
  std::vector<QAExample> forget;
  std::vector<QAExample> retain;
  std::vector<QAExample> real_world;
  std::vector<QAExample> real_authors;

  // Throws if a question appears in both forget and retain.
  void validate() const;
};

// A verbatim-memorization probe: the model is prompted with `prefix` and its
// greedy continuation is compared with `continuation`.
struct ContinuationProbe {
  std::vector<std::string> prefix;
  std::vector<std::string> continuation;
};

// Lowercased whitespace tokens; the only tokenization ROUGE uses.
std::vector<std::string> rouge_tokens(std::string_view text);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// LCS(candidate, reference) / |reference|.
double rouge_l_recall(std::span<const std::string> candidate, std::span<const std::string> reference);

// Log-probabilities of each `target` token given BOS + prefix + the preceding
// target tokens. Out-of-vocabulary words raise a data error listing them.
std::vector<double> conditional_logprobs(const LogitProvider& scorer, const Vocab& vocab,
                                         std::span<const std::string> prefix,
                                         std::span<const std::string> target);

// Geometric-mean per-token probability of `answer` after `question`.
double answer_probability(const LogitProvider& scorer, const Vocab& vocab,
                          const std::string& question, const std::string& answer);

// Mean perturbed-answer probability over the paraphrased-answer probability.
double truth_ratio(const LogitProvider& scorer, const Vocab& vocab, const QAExample& ex);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov survival function Q(lambda).
double kolmogorov_survival(double lambda);

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys);

// ln of the KS p-value between the two models' forget-set truth ratios.
double forget_quality(const LogitProvider& candidate, const LogitProvider& retrain,
                      const Vocab& vocab, std::span<const QAExample> forget_set);

// The acceptance line used for forget quality: ln(0.05).
inline const double kForgetQualityThreshold = std::log(0.05);

// Harmonic mean; zero when any component is zero.
double model_utility(std::span<const double> components);

double verb_mem(const LogitProvider& model, const Vocab& vocab,
                std::span<const ContinuationProbe> probes);
double know_mem(const LogitProvider& model, const Vocab& vocab, std::span<const QAExample> qa);

// Mean of the lowest ceil(k_frac * L) values.
double min_k_of(std::span<const double> token_logprobs, double k_frac);
double min_k_logprob(const LogitProvider& scorer, const Vocab& vocab,
                     std::span<const std::string> text, double k_frac);

// P(member > nonmember) with ties counted as one half.
double auc(std::span<const double> member_scores, std::span<const double> nonmember_scores);

// 100 * (auc_unlearned - auc_retrain) / auc_retrain.
double priv_leak(double auc_unlearned, double auc_retrain);

// Splits a document in two; the first `prefix_fraction` of tokens (at least
// one, leaving at least one) becomes the prompt.
ContinuationProbe make_probe(std::span<const std::string> words, double prefix_fraction = 0.5);

struct SetMetrics {
  double rouge = 0.0;        // mean ROUGE-L recall of greedy answers
  double probability = 0.0;  // mean gold-answer probability
  double truth_ratio = 0.0;  // mean truth ratio
};

struct EvalReport {
  double forget_quality_log_p = 0.0;
  double model_utility = 0.0;
  double verb_mem_forget = 0.0;
  double know_mem_forget = 0.0;
  double know_mem_retain = 0.0;
  double priv_leak = 0.0;
  std::map<std::string, SetMetrics> per_set;
};

struct EvalInputs {
  const Vocab* vocab = nullptr;
  const LogitProvider* candidate = nullptr;
  const LogitProvider* retrain = nullptr;
  const EvalSets* sets = nullptr;
  std::vector<ContinuationProbe> verbatim_probes;  // from forget documents
  std::vector<std::vector<std::string>> members;     // forget documents
  std::vector<std::vector<std::string>> nonmembers;  // held-out documents
  double min_k_fraction = 0.2;
};

EvalReport evaluate(const EvalInputs& in);

// Rounds to 6 significant digits for report output.
double round_significant(double x, int digits = 6);

nlohmann::ordered_json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace ucd
