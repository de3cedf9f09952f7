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

#include <cmath>
#include <random>

#include "doctest.h"
#include "ucd/compose.hpp"
#include "ucd/ngram.hpp"

using namespace ucd;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Eigen::VectorXd random_logits(std::mt19937_64& gen, Eigen::Index n, double scale = 3.0) {
  std::normal_distribution<double> d(0.0, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

}  // namespace

TEST_CASE("log_softmax examples") {
  auto half = std::log(0.5);
  auto a = log_softmax(vec({0, 0}));
  CHECK(a[0] == doctest::Approx(half));
  CHECK(a[1] == doctest::Approx(half));

  auto b = log_softmax(vec({1000, 1000}));
  CHECK(b.allFinite());
  CHECK(b[0] == doctest::Approx(half));

  auto c = log_softmax(vec({2, 0}));
  CHECK(std::abs(c.array().exp().sum() - 1.0) < 1e-12);
  CHECK(std::exp(c[0]) == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + 1.0)));
  CHECK(std::abs(logsumexp(c)) < 1e-9);

  CHECK_THROWS(log_softmax(vec({0, std::numeric_limits<double>::infinity()})));
}

TEST_CASE("log_softmax is generic over the scalar type") {
  Eigen::VectorXf f(3);
  f << 1.0f, 2.0f, 3.0f;
  Eigen::VectorXf out = log_softmax(f);
  CHECK(std::abs(out.array().exp().sum() - 1.0f) < 1e-6f);
}

TEST_CASE("contrastive_signal examples") {
  auto z = contrastive_signal(vec({0.3, -1.0, 2.0}), vec({0.3, -1.0, 2.0}));
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);

  auto d = contrastive_signal(vec({std::log(0.8), std::log(0.2)}), vec({std::log(0.5), std::log(0.5)}));
  CHECK(d[0] == doctest::Approx(std::log(1.6)));
  CHECK(d[1] == doctest::Approx(std::log(0.4)));

  auto shifted = contrastive_signal(vec({std::log(0.8) + 17.0, std::log(0.2) + 17.0}),
                                    vec({std::log(0.5), std::log(0.5)}));
  CHECK((shifted - d).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_WITH(contrastive_signal(vec({0, 0}), vec({0, 0, 0})), "vocab mismatch");
}

TEST_CASE("compose: identical auxiliaries leave the reference untouched") {
  std::mt19937_64 gen(1);
  for (double alpha : {0.01, 0.1, 0.5, 1.0, 3.0}) {
    for (auto mode : {ComposeMode::kUcd, ComposeMode::kUcs}) {
      auto p = random_logits(gen, 9);
      auto f = random_logits(gen, 9);
      auto out = softmax(compose(p, f, f, {alpha, mode}));
      CHECK((out - softmax(p)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("compose: alpha = 1 with A_forget = P and A_clean = P_clean recovers P_clean") {
  std::mt19937_64 gen(2);
  for (int i = 0; i < 50; ++i) {
    auto p = log_softmax(random_logits(gen, 12));
    auto clean = log_softmax(random_logits(gen, 12));
    auto raw = compose_unnormalized(p, p, clean, {1.0, ComposeMode::kUcd});
    CHECK(raw == log_softmax(clean));  // bit-exact before renormalization
    auto out = softmax(compose(p, p, clean, {1.0, ComposeMode::kUcd}));
    CHECK((out - softmax(clean)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("compose: UCD two-token hand evaluation") {
  // p = [.7, .3], Delta = [0.5, -0.5] realized through f and c.
  auto p = vec({std::log(0.7), std::log(0.3)});
  auto c = vec({0.0, 0.0});
  auto f = vec({0.5, -0.5});
  auto out = softmax(compose(p, f, c, {0.5, ComposeMode::kUcd}));
  const double e0 = 0.7 * std::exp(-0.25);
  const double e1 = 0.3 * std::exp(0.25);
  CHECK(out[0] == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-14));
}

TEST_CASE("compose: UCS with a nonpositive signal is the identity") {
  auto p = log_softmax(vec({std::log(0.6), std::log(0.4)}));
  auto delta = vec({-1.0, -2.0});
  for (double alpha : {0.1, 1.0, 10.0}) {
    CHECK(apply_signal(p, delta, {alpha, ComposeMode::kUcs}) == p);
  }
  // Same through compose: f' <= c' everywhere only when the distributions agree,
  // so use a signal that is zero after normalization.
  auto f = vec({3.0, 2.0});
  CHECK((softmax(compose(p, f, f, {10.0, ComposeMode::kUcs})) - softmax(p)).cwiseAbs().maxCoeff() <
        1e-15);
}

TEST_CASE("compose: reference-only ignores auxiliaries; validation") {
  auto p = vec({1.0, 2.0, 3.0});
  auto out = compose(p, vec({9.0, 0.0, 0.0}), vec({0.0, 0.0, 9.0}), {5.0, ComposeMode::kReferenceOnly});
  CHECK(out == log_softmax(p));
  CHECK_THROWS(compose(p, p, p, {-0.1, ComposeMode::kUcd}));
  CHECK_THROWS(compose(p, p, p, {std::nan(""), ComposeMode::kUcd}));
  CHECK_THROWS_WITH(compose(p, vec({0, 0}), p, {0.1, ComposeMode::kUcd}), "vocab mismatch");
  CHECK(parse_compose_mode("UCS") == ComposeMode::kUcs);
  CHECK(parse_compose_mode("reference_only") == ComposeMode::kReferenceOnly);
  CHECK_THROWS(parse_compose_mode("bogus"));
}

TEST_CASE("property: UCD is shift invariant in every raw input") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    auto p = random_logits(gen, 7), f = random_logits(gen, 7), c = random_logits(gen, 7);
    ComposeConfig cfg{0.05 + static_cast<double>(i % 20) * 0.1, ComposeMode::kUcd};
    auto base = softmax(compose(p, f, c, cfg));
    Eigen::VectorXd ps = p.array() + shift(gen);
    Eigen::VectorXd fs = f.array() + shift(gen);
    Eigen::VectorXd cs = c.array() + shift(gen);
    CHECK((softmax(compose(ps, fs, cs, cfg)) - base).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("property: UCS output depends only on the represented distributions") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> shift(-20.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    auto p = random_logits(gen, 6), f = random_logits(gen, 6), c = random_logits(gen, 6);
    ComposeConfig cfg{0.7, ComposeMode::kUcs};
    Eigen::VectorXd fs = f.array() + shift(gen);
    Eigen::VectorXd cs = c.array() + shift(gen);
    CHECK((softmax(compose(p, fs, cs, cfg)) - softmax(compose(p, f, c, cfg))).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("property: UCS never raises a token above the reference") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 200; ++i) {
    auto p = random_logits(gen, 8), f = random_logits(gen, 8), c = random_logits(gen, 8);
    ComposeConfig cfg{0.3, ComposeMode::kUcs};
    auto raw = compose_unnormalized(p, f, c, cfg);
    auto ref = log_softmax(p);
    auto delta = contrastive_signal(f, c);
    for (Eigen::Index y = 0; y < raw.size(); ++y) {
      CHECK(raw[y] <= ref[y]);
      CHECK((raw[y] == ref[y]) == (delta[y] <= 0.0));
    }
  }
}

TEST_CASE("property: UCD equals UCS when the signal is nonnegative") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    auto p = log_softmax(random_logits(gen, 5));
    Eigen::VectorXd delta = random_logits(gen, 5).cwiseAbs();
    ComposeConfig ucd{u(gen), ComposeMode::kUcd};
    ComposeConfig ucs{ucd.alpha, ComposeMode::kUcs};
    CHECK(apply_signal(p, delta, ucd) == apply_signal(p, delta, ucs));
  }
}

TEST_CASE("property: aligned distribution is continuous in alpha and alpha = 0 is the identity") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 50; ++i) {
    auto p = random_logits(gen, 10), f = random_logits(gen, 10), c = random_logits(gen, 10);
    for (auto mode : {ComposeMode::kUcd, ComposeMode::kUcs}) {
      CHECK((softmax(compose(p, f, c, {0.0, mode})) - softmax(p)).cwiseAbs().maxCoeff() < 1e-12);
      const double a = 0.4;
      auto at = softmax(compose(p, f, c, {a, mode}));
      auto near = softmax(compose(p, f, c, {a + 1e-7, mode}));
      CHECK((at - near).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("ComposedProvider rejects mismatched vocabularies") {
  auto va = Vocab::from_tokens({"<bos>", "<eos>", "a"});
  auto vb = Vocab::from_tokens({"<bos>", "<eos>", "b"});
  std::vector<std::vector<TokenId>> corpus{{2}};
  auto ma = std::make_shared<NGramModel>(NGramModel::train(va, corpus, 2, 0.1));
  auto mb = std::make_shared<NGramModel>(NGramModel::train(vb, corpus, 2, 0.1));
  CHECK_THROWS_WITH_AS(ComposedProvider(ma, ma, mb, {}),
                       doctest::Contains("incompatible provider"), Error);
  ComposedProvider ok(ma, ma, ma, {0.5, ComposeMode::kUcd});
  auto lp = ok.logits(Context({0}, 3));
  CHECK((lp - ma->logits(Context({0}, 3))).cwiseAbs().maxCoeff() < 1e-12);
}
