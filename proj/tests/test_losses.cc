// tests/test_losses.cc

// Copyright 2026  The ALDR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "aldr/losses.h"
#include "aldr/tensor.h"
#include "doctest.h"
#include "testing_util.h"

using aldr::ConfigError;
using aldr::DataError;
using aldr::NumericError;
using aldr::autodiff::Graph;
using aldr::autodiff::Group;
using aldr::autodiff::Tensor;
using aldr::losses::ASoftmaxConfig;
using aldr::testing::fill_uniform;
using aldr::testing::max_grad_rel_error;

namespace losses = aldr::losses;

TEST_CASE("softmax cross entropy hand values") {
  Graph g;
  Tensor zero = Tensor::zeros({1, 4});
  CHECK_EQ(losses::softmax_ce(g, zero, {1}).value(),
           doctest::Approx(std::log(4.0)).epsilon(1e-12));

  Tensor hot = Tensor::from_values({1, 3}, {0.0, 1000.0, 0.0});
  CHECK_LT(losses::softmax_ce(g, hot, {1}).value(), 1e-9);

  Tensor l = Tensor::from_values({1, 3}, {1.0, 2.0, 3.0});
  CHECK_EQ(losses::softmax_ce(g, l, {2}).value(),
           doctest::Approx(0.40760596444438).epsilon(1e-10));
}

TEST_CASE("softmax cross entropy rejects bad targets") {
  Graph g;
  Tensor l = Tensor::zeros({2, 3});
  CHECK_THROWS_AS(losses::softmax_ce(g, l, {0, 3}), DataError);
  CHECK_THROWS_AS(losses::softmax_ce(g, l, {0}), DataError);
}

TEST_CASE("softmax cross entropy gradients match finite differences") {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor logits = Tensor::zeros({3, 5}, true);
    fill_uniform(logits, rng, -2.0, 2.0);
    std::vector<int> targets = {static_cast<int>(rng() % 5),
                                static_cast<int>(rng() % 5),
                                static_cast<int>(rng() % 5)};
    auto loss_value = [&]() {
      Graph g;
      return losses::softmax_ce(g, logits, targets).value();
    };
    Graph g;
    g.backward(losses::softmax_ce(g, logits, targets));
    CHECK_LT(max_grad_rel_error(loss_value, {logits}), 1e-4);
    logits.zero_grad();
  }
}

TEST_CASE("angular phi hand values and piecewise structure") {
  // theta = 0: k = 0, phi = cos 0 = 1.
  CHECK_EQ(losses::angular_phi(1.0, 4), 1.0);
  // theta = pi/3, m = 4: k = 1, phi = -cos(4 pi/3) - 2 = -1.5. cos(pi/3)
  // is exactly representable, so the Chebyshev evaluation is exact.
  CHECK_EQ(losses::angular_phi(0.5, 4), -1.5);
  // m = 1 collapses to cos theta.
  for (double c : {-0.9, -0.3, 0.0, 0.4, 1.0})
    CHECK_EQ(losses::angular_phi(c, 1), doctest::Approx(c).epsilon(1e-15));
  CHECK_THROWS_AS(losses::angular_phi(0.5, 0), ConfigError);
}

TEST_CASE("angular phi is continuous and non-increasing on a dense grid") {
  const double pi = 3.14159265358979323846;
  for (int m : {1, 2, 3, 4, 6}) {
    const int n = 10000;
    double prev = losses::angular_phi(std::cos(0.0), m);
    for (int i = 1; i <= n; ++i) {
      const double theta = pi * i / n;
      const double cur = losses::angular_phi(std::cos(theta), m);
      CHECK_LE(cur, prev + 1e-12);  // non-increasing
      // |d phi / d theta| <= m bounds the step between grid points.
      CHECK_LE(std::fabs(cur - prev), m * pi / n + 1e-9);
      prev = cur;
    }
    // Piece boundaries evaluate identically from both sides.
    for (int k = 1; k < m; ++k) {
      const double boundary = pi * k / m;
      const double left = losses::angular_phi(std::cos(boundary - 1e-9), m);
      const double right = losses::angular_phi(std::cos(boundary + 1e-9), m);
      CHECK_EQ(left, doctest::Approx(right).epsilon(1e-7));
      CHECK_EQ(left, doctest::Approx(1.0 - 2.0 * k).epsilon(1e-7));
    }
  }
}

TEST_CASE("a-softmax with m=1 equals softmax on angular logits") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int b = 3, d = 4, n = 5;
    Tensor f = Tensor::zeros({b, d});
    Tensor w = Tensor::zeros({d, n});
    fill_uniform(f, rng);
    fill_uniform(w, rng);
    std::vector<int> targets;
    for (int r = 0; r < b; ++r)
      targets.push_back(static_cast<int>(rng() % n));

    // Angular logits: f . w_hat per class.
    std::vector<double> ang(b * n, 0.0);
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += w.data()[k * n + c] * w.data()[k * n + c];
      s = std::sqrt(s);
      for (int r = 0; r < b; ++r) {
        double dot = 0.0;
        for (int k = 0; k < d; ++k)
          dot += f.data()[r * d + k] * w.data()[k * n + c] / s;
        ang[r * n + c] = dot;
      }
    }
    Graph g;
    ASoftmaxConfig cfg;
    cfg.m = 1;
    cfg.lambda_cos = 5.0 * trial;  // any annealing weight
    double a = losses::a_softmax_loss(g, f, w, targets, cfg).value();
    double b2 =
        losses::softmax_ce(g, Tensor::from_values({b, n}, ang), targets)
            .value();
    CHECK_EQ(a, doctest::Approx(b2).epsilon(1e-9));
  }
}

TEST_CASE("a-softmax gradients match finite differences") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const int b = 3, d = 4, n = 5;
    Tensor f = Tensor::zeros({b, d}, true);
    Tensor w = Tensor::zeros({d, n}, true);
    fill_uniform(f, rng);
    fill_uniform(w, rng);
    std::vector<int> targets;
    for (int r = 0; r < b; ++r)
      targets.push_back(static_cast<int>(rng() % n));
    ASoftmaxConfig cfg;
    cfg.m = 1 + static_cast<int>(rng() % 4);
    auto loss_value = [&]() {
      Graph g;
      return losses::a_softmax_loss(g, f, w, targets, cfg).value();
    };
    Graph g;
    g.backward(losses::a_softmax_loss(g, f, w, targets, cfg));
    CHECK_LT(max_grad_rel_error(loss_value, {f, w}), 1e-4);
    f.zero_grad();
    w.zero_grad();
  }
}

TEST_CASE("a-softmax rejects degenerate inputs") {
  Graph g;
  Tensor f0 = Tensor::zeros({1, 3});
  Tensor w = Tensor::from_values({3, 2}, {1, 0, 0, 1, 0, 0});
  ASoftmaxConfig cfg;
  CHECK_THROWS_AS(losses::a_softmax_loss(g, f0, w, {0}, cfg), NumericError);
  Tensor f = Tensor::from_values({1, 3}, {1, 1, 1});
  Tensor w0 = Tensor::zeros({3, 2});
  CHECK_THROWS_AS(losses::a_softmax_loss(g, f, w0, {0}, cfg), NumericError);
  cfg.m = 0;
  CHECK_THROWS_AS(losses::a_softmax_loss(g, f, w, {0}, cfg), ConfigError);
}

TEST_CASE("eliminating loss is minimized at the uniform distribution") {
  Graph g;
  Tensor uniform = Tensor::zeros({2, 4}, true);
  Tensor loss = losses::adv_eliminate_loss(g, uniform);
  CHECK_EQ(loss.value(), doctest::Approx(std::log(4.0)).epsilon(1e-12));
  g.backward(loss);
  REQUIRE(uniform.grad_if_any() != nullptr);
  for (double v : *uniform.grad_if_any()) CHECK_EQ(v, 0.0);

  // p = (0.9, 0.1): -(log .9 + log .1)/2.
  Tensor skew =
      Tensor::from_values({1, 2}, {std::log(0.9), std::log(0.1)});
  CHECK_EQ(losses::adv_eliminate_loss(g, skew).value(),
           doctest::Approx(1.2039728043259361).epsilon(1e-12));

  // Any other distribution sits above log N.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor l = Tensor::zeros({1, 4});
    fill_uniform(l, rng, -2.0, 2.0);
    CHECK_GE(losses::adv_eliminate_loss(g, l).value(),
             std::log(4.0) - 1e-12);
  }
}

TEST_CASE("eliminating loss gradients match finite differences") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor logits = Tensor::zeros({3, 4}, true);
    fill_uniform(logits, rng, -2.0, 2.0);
    auto loss_value = [&]() {
      Graph g;
      return losses::adv_eliminate_loss(g, logits).value();
    };
    Graph g;
    g.backward(losses::adv_eliminate_loss(g, logits));
    CHECK_LT(max_grad_rel_error(loss_value, {logits}), 1e-4);
    logits.zero_grad();
  }
}

TEST_CASE("reconstruction loss values and gradient") {
  Graph g;
  Tensor s = Tensor::from_values({1, 6}, {1, 2, 3, 4, 5, 6});
  CHECK_EQ(losses::reconstruction_loss(g, s, s).value(), 0.0);

  Tensor shifted = Tensor::from_values({1, 6}, {2, 3, 4, 5, 6, 7}, true);
  Tensor loss = losses::reconstruction_loss(g, shifted, s);
  CHECK_EQ(loss.value(), doctest::Approx(3.0));  // n/2 with n = 6
  g.backward(loss);
  for (double v : *shifted.grad_if_any()) CHECK_EQ(v, doctest::Approx(1.0));

  // Two batch items, mean over the batch.
  Tensor s2 = Tensor::zeros({2, 3});
  Tensor h2 = Tensor::from_values({2, 3}, {1, 1, 1, 1, 1, 1});
  CHECK_EQ(losses::reconstruction_loss(g, h2, s2).value(),
           doctest::Approx(1.5));

  CHECK_THROWS_AS(
      losses::reconstruction_loss(g, Tensor::zeros({1, 2}), Tensor::zeros({1, 3})),
      aldr::ShapeError);
}

TEST_CASE("reconstruction gradients match finite differences") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor s = Tensor::zeros({2, 5});
    Tensor h = Tensor::zeros({2, 5}, true);
    fill_uniform(s, rng);
    fill_uniform(h, rng);
    auto loss_value = [&]() {
      Graph g;
      return losses::reconstruction_loss(g, h, s).value();
    };
    Graph g;
    g.backward(losses::reconstruction_loss(g, h, s));
    CHECK_LT(max_grad_rel_error(loss_value, {h}), 1e-4);
    h.zero_grad();
  }
}

TEST_CASE("total loss combines with the configured weights") {
  Graph g;
  Tensor one = Tensor::scalar(1.0);
  losses::LossWeights w;
  CHECK_EQ(losses::total_loss(g, one, one, one, one, w).value(),
           doctest::Approx(1.22).epsilon(1e-12));

  losses::LossWeights off;
  off.lambda_adv = 0.0;
  off.lambda_r = 0.0;
  Tensor lp = Tensor::scalar(0.7);
  CHECK_EQ(losses::total_loss(g, lp, one, one, one, off).value(),
           doctest::Approx(0.7));

  // Linearity in L_r.
  Tensor r1 = Tensor::scalar(2.0);
  Tensor r2 = Tensor::scalar(4.0);
  double t1 = losses::total_loss(g, lp, one, one, r1, w).value();
  double t2 = losses::total_loss(g, lp, one, one, r2, w).value();
  CHECK_EQ(t2 - t1, doctest::Approx(w.lambda_r * 2.0));

  Tensor bad = Tensor::scalar(std::nan(""));
  try {
    losses::total_loss(g, lp, bad, one, one, w);
    CHECK(false);
  } catch (const NumericError &e) {
    CHECK(std::string(e.what()).find("L_adv_s") != std::string::npos);
  }
}

TEST_CASE("routing sets name the documented groups") {
  CHECK(losses::route_p().contains(Group::kEncoderP));
  CHECK(losses::route_p().contains(Group::kClassifierSpeaker));
  CHECK_FALSE(losses::route_p().contains(Group::kEncoderE));

  CHECK(losses::route_adv_s().contains(Group::kClassifierAdv));
  CHECK_FALSE(losses::route_adv_s().contains(Group::kEncoderE));

  CHECK(losses::route_adv_e().contains(Group::kEncoderE));
  CHECK_FALSE(losses::route_adv_e().contains(Group::kClassifierAdv));

  CHECK(losses::route_r().contains(Group::kDecoder));
  CHECK(losses::route_r().contains(Group::kEncoderP));
  CHECK(losses::route_r().contains(Group::kEncoderE));
  CHECK_FALSE(losses::route_r().contains(Group::kClassifierAdv));
}
