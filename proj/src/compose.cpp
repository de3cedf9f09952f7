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

#include "ucd/compose.hpp"

#include <cctype>

namespace ucd {

std::string to_string(ComposeMode mode) {
  switch (mode) {
    case ComposeMode::kUcd:
      return "ucd";
    case ComposeMode::kUcs:
      return "ucs";
    case ComposeMode::kReferenceOnly:
      return "reference_only";
  }
  return "unknown";
}

ComposeMode parse_compose_mode(std::string_view text) {
  std::string s(text);
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s == "ucd") return ComposeMode::kUcd;
  if (s == "ucs") return ComposeMode::kUcs;
  if (s == "reference" || s == "reference_only" || s == "reference-only") {
    return ComposeMode::kReferenceOnly;
  }
  fail(ErrorKind::kUsage, "unknown compose mode '" + std::string(text) + "'");
}

void ComposeConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    fail(ErrorKind::kUsage, "alpha must be finite and nonnegative");
  }
}

ComposedProvider::ComposedProvider(ProviderPtr reference, ProviderPtr forget, ProviderPtr clean,
                                   ComposeConfig cfg)
    : reference_(std::move(reference)),
      forget_(std::move(forget)),
      clean_(std::move(clean)),
      cfg_(cfg) {
  cfg_.validate();
  if (!reference_ || !forget_ || !clean_) fail(ErrorKind::kUsage, "composition needs three providers");
  require_same_vocab({reference_.get(), forget_.get(), clean_.get()});
}

LogitVector ComposedProvider::logits(const Context& ctx) const {
  if (cfg_.mode == ComposeMode::kReferenceOnly) return log_softmax(reference_->logits(ctx));
  return compose(reference_->logits(ctx), forget_->logits(ctx), clean_->logits(ctx), cfg_);
}

}  // namespace ucd
