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

#include "ucd/provider.hpp"

#include <cmath>

#include "ucd/compose.hpp"
#include "ucd/error.hpp"

namespace ucd {

void require_same_vocab(const std::vector<const LogitProvider*>& providers) {
  if (providers.empty()) return;
  const auto& first = providers.front()->vocab_hash();
  for (const auto* p : providers) {
    if (p->vocab_hash() != first || p->vocab_size() != providers.front()->vocab_size()) {
      fail(ErrorKind::kData,
           "incompatible provider: vocab hash " + p->vocab_hash() + " != " + first);
    }
  }
}

MixtureProvider::MixtureProvider(std::vector<ProviderPtr> members, std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
  if (members_.empty() || members_.size() != weights_.size()) {
    fail(ErrorKind::kUsage, "mixture needs one weight per member");
  }
  std::vector<const LogitProvider*> raw;
  double sum = 0.0;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      fail(ErrorKind::kUsage, "mixture weights must be finite and nonnegative");
    }
    sum += weights_[i];
    raw.push_back(members_[i].get());
  }
  if (!(sum > 0.0)) fail(ErrorKind::kUsage, "mixture weights sum to zero");
  for (auto& w : weights_) w /= sum;
  require_same_vocab(raw);
}

LogitVector MixtureProvider::logits(const Context& ctx) const {
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab_size()));
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    probs += weights_[i] * log_softmax(members_[i]->logits(ctx)).array().exp().matrix();
  }
  return probs.array().log().matrix();
}

}  // namespace ucd
