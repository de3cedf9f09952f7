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

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ucd/vocab.hpp"

namespace ucd {

// Natural-log scores over the next token, one entry per vocabulary id.
using LogitVector = Eigen::VectorXd;

// "context -> LogitVector". Implementations are deterministic and must be
// safe to call concurrently once constructed.
class LogitProvider {
 public:
  virtual ~LogitProvider() = default;

  virtual const std::string& vocab_hash() const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual LogitVector logits(const Context& ctx) const = 0;
};

using ProviderPtr = std::shared_ptr<const LogitProvider>;

// Throws "incompatible provider" naming both hashes unless every provider
// agrees with the first.
void require_same_vocab(const std::vector<const LogitProvider*>& providers);

// Log of a convex combination of the members' next-token distributions.
// Stands in for an approximate clean model when no retrained one exists.
class MixtureProvider final : public LogitProvider {
 public:
  MixtureProvider(std::vector<ProviderPtr> members, std::vector<double> weights);

  const std::string& vocab_hash() const override { return members_.front()->vocab_hash(); }
  std::size_t vocab_size() const override { return members_.front()->vocab_size(); }
  LogitVector logits(const Context& ctx) const override;

 private:
  std::vector<ProviderPtr> members_;
  std::vector<double> weights_;
};

}  // namespace ucd
