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

// Logit composition for inference-time unlearning.
//
// Given a reference model P and two auxiliaries A_forget / A_clean, the
// aligned next-token scores are
//
//   UCD:  log P(y|x) - alpha * (log A_forget(y|x) - log A_clean(y|x))
//   UCS:  log P(y|x) - alpha * max(log A_forget(y|x) - log A_clean(y|x), 0)
//
// Every input is first canonicalized with log_softmax, so providers that emit
// unnormalized scores compose exactly like their normalized counterparts.
// The clipped (UCS) form is not shift invariant in its raw inputs, which is
// why this canonicalization is mandatory rather than a convenience.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "ucd/error.hpp"
#include "ucd/provider.hpp"

namespace ucd {

enum class ComposeMode { kUcd, kUcs, kReferenceOnly };

std::string to_string(ComposeMode mode);
// Accepts "ucd", "ucs", "reference" (case-insensitive) and "reference_only".
ComposeMode parse_compose_mode(std::string_view text);

struct ComposeConfig {
  double alpha = 0.1;
  ComposeMode mode = ComposeMode::kUcd;

  // alpha must be finite and >= 0.
  void validate() const;
};

template <typename Derived>
using DenseVectorOf = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;

// v - logsumexp(v), stable for large magnitudes.
template <typename Derived>
DenseVectorOf<Derived> log_softmax(const Eigen::MatrixBase<Derived>& v) {
  using std::exp;
  using std::log;
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) fail(ErrorKind::kData, "log_softmax of an empty vector");
  if (!v.allFinite()) fail(ErrorKind::kData, "logits must be finite");
  const Scalar m = v.maxCoeff();
  const Scalar lse = m + log((v.array() - m).exp().sum());
  return (v.array() - lse).matrix();
}

template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// Delta(y) = log_softmax(forget)[y] - log_softmax(clean)[y].
template <typename DerivedF, typename DerivedC>
DenseVectorOf<DerivedF> contrastive_signal(const Eigen::MatrixBase<DerivedF>& forget,
                                           const Eigen::MatrixBase<DerivedC>& clean) {
  if (forget.size() != clean.size()) fail(ErrorKind::kData, "vocab mismatch");
  return log_softmax(forget) - log_softmax(clean);
}

// Applies a precomputed signal to normalized reference log-probabilities:
// p - alpha * delta (UCD) or p - alpha * max(delta, 0) (UCS). Not
// renormalized.
template <typename DerivedP, typename DerivedD>
DenseVectorOf<DerivedP> apply_signal(const Eigen::MatrixBase<DerivedP>& reference_logprobs,
                                     const Eigen::MatrixBase<DerivedD>& delta,
                                     const ComposeConfig& cfg) {
  using Scalar = typename DerivedP::Scalar;
  cfg.validate();
  if (reference_logprobs.size() != delta.size()) fail(ErrorKind::kData, "vocab mismatch");
  const Scalar alpha = static_cast<Scalar>(cfg.alpha);
  switch (cfg.mode) {
    case ComposeMode::kReferenceOnly:
      return reference_logprobs;
    case ComposeMode::kUcd:
      return reference_logprobs - alpha * delta;
    case ComposeMode::kUcs:
      return reference_logprobs - alpha * delta.cwiseMax(Scalar(0));
  }
  fail(ErrorKind::kInternal, "unknown compose mode");
}

// Aligned scores before the final renormalization. UCD is evaluated as
// (p' - alpha f') + alpha c' so that alpha = 1 with f == p reproduces c
// bit-for-bit.
template <typename DerivedP, typename DerivedF, typename DerivedC>
DenseVectorOf<DerivedP> compose_unnormalized(const Eigen::MatrixBase<DerivedP>& reference,
                                             const Eigen::MatrixBase<DerivedF>& forget,
                                             const Eigen::MatrixBase<DerivedC>& clean,
                                             const ComposeConfig& cfg) {
  using Scalar = typename DerivedP::Scalar;
  cfg.validate();
  if (reference.size() != forget.size() || reference.size() != clean.size()) {
    fail(ErrorKind::kData, "vocab mismatch");
  }
  const Scalar alpha = static_cast<Scalar>(cfg.alpha);
  DenseVectorOf<DerivedP> p = log_softmax(reference);
  switch (cfg.mode) {
    case ComposeMode::kReferenceOnly:
      return p;
    case ComposeMode::kUcd: {
      const DenseVectorOf<DerivedP> f = log_softmax(forget);
      const DenseVectorOf<DerivedP> c = log_softmax(clean);
      return (p - alpha * f) + alpha * c;
    }
    case ComposeMode::kUcs: {
      const DenseVectorOf<DerivedP> delta = contrastive_signal(forget, clean);
      return p - alpha * delta.cwiseMax(Scalar(0));
    }
  }
  fail(ErrorKind::kInternal, "unknown compose mode");
}

// Normalized aligned log-probabilities; softmax of the result is the aligned
// next-token distribution.
template <typename DerivedP, typename DerivedF, typename DerivedC>
DenseVectorOf<DerivedP> compose(const Eigen::MatrixBase<DerivedP>& reference,
                                const Eigen::MatrixBase<DerivedF>& forget,
                                const Eigen::MatrixBase<DerivedC>& clean,
                                const ComposeConfig& cfg) {
  auto raw = compose_unnormalized(reference, forget, clean, cfg);
  if (cfg.mode == ComposeMode::kReferenceOnly) return raw;  // already log_softmax(reference)
  if (!raw.allFinite()) fail(ErrorKind::kInternal, "composition produced non-finite logits");
  return log_softmax(raw);
}

template <typename Derived>
DenseVectorOf<Derived> softmax(const Eigen::MatrixBase<Derived>& v) {
  return log_softmax(v).array().exp().matrix();
}

// Evaluates the composition lazily for whatever context it is asked about.
// No combined model is materialized; each call queries the three providers.
class ComposedProvider final : public LogitProvider {
 public:
  ComposedProvider(ProviderPtr reference, ProviderPtr forget, ProviderPtr clean,
                   ComposeConfig cfg);

  const std::string& vocab_hash() const override { return reference_->vocab_hash(); }
  std::size_t vocab_size() const override { return reference_->vocab_size(); }
  LogitVector logits(const Context& ctx) const override;

  const ComposeConfig& config() const { return cfg_; }

 private:
  ProviderPtr reference_;
  ProviderPtr forget_;
  ProviderPtr clean_;
  ComposeConfig cfg_;
};

}  // namespace ucd
