#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lmm/model.hpp"
#include "lmm/optimizer.hpp"

using namespace lmm;

namespace {

struct Batch {
  std::vector<std::vector<double>> x;
  std::vector<Label> y;
  std::vector<LabeledInput> inputs() const {
    std::vector<LabeledInput> out;
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back({x[i], y[i]});
    return out;
  }
};

Batch random_batch(Rng& rng, std::size_t n, std::size_t d, std::size_t m) {
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.normal();
    b.x.push_back(std::move(x));
    b.y.push_back(rng.below(m));
  }
  return b;
}

// Largest per-coordinate relative error between analytic and central-difference gradients.
double fd_error(ModelParams p, const std::vector<LabeledInput>& batch) {
  const auto analytic = grad(p, batch).grad;
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p.values()[i];
    p.values()[i] = keep + h;
    const double up = mean_loss(p, batch);
    p.values()[i] = keep - h;
    const double down = mean_loss(p, batch);
    p.values()[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double err = std::abs(numeric - analytic[i]) / std::max({std::abs(numeric), std::abs(analytic[i]), 1e-3});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

TEST(Forward, ZeroParamsAreUniform) {
  const ModelParams p(Architecture::softmax_linear, 3, 4);
  for (double v : forward(p, std::vector<double>{1, 2, 3})) EXPECT_DOUBLE_EQ(v, 0.25);
  const ModelParams q(Architecture::mlp, 3, 5, 4);
  for (double v : forward(q, std::vector<double>{1, 2, 3})) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Forward, LargeLogitsDoNotOverflow) {
  ModelParams p(Architecture::softmax_linear, 1, 2);
  p.values()[p.b1_offset()] = 1000.0;
  const auto probs = forward(p, std::vector<double>{0.0});
  EXPECT_EQ(probs[0], 1.0);
  EXPECT_GE(probs[1], 0.0);
  EXPECT_LT(probs[1], 1e-300);
}

TEST(Forward, SumsToOne) {
  Rng rng(1);
  for (auto arch : {Architecture::softmax_linear, Architecture::mlp}) {
    const auto p = init_params(arch, 4, 5, 8, 3);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> x(4);
      for (auto& v : x) v = 5 * rng.normal();
      double s = 0.0;
      for (double v : forward(p, x)) s += v;
      ASSERT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Forward, InputErrors) {
  const auto p = init_params(Architecture::softmax_linear, 2, 2, 0, 1);
  EXPECT_THROW(forward(p, std::vector<double>{1.0}), DataError);
  EXPECT_THROW(forward(p, std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}), DataError);
}

TEST(Xent, Examples) {
  EXPECT_EQ(xent_loss(std::vector<double>{0, 1, 0}, 1), 0.0);
  EXPECT_NEAR(xent_loss(std::vector<double>{0.5, 0.5}, 0), 0.6931471805599453, 1e-15);
  EXPECT_NEAR(xent_loss(std::vector<double>{0.9, 0.1}, 1), 2.302585092994046, 1e-12);
  EXPECT_NEAR(xent_loss(std::vector<double>{1.0, 0.0}, 1), -std::log(1e-12), 1e-9);
  EXPECT_THROW(xent_loss(std::vector<double>{1.0, 0.0}, 2), DataError);
}

TEST(Init, GlorotBoundsAndZeroBias) {
  const auto p = init_params(Architecture::mlp, 6, 3, 10, 9);
  const double s1 = std::sqrt(6.0 / 16.0), s2 = std::sqrt(6.0 / 13.0);
  for (std::size_t i = 0; i < p.b1_offset(); ++i) EXPECT_LE(std::abs(p.values()[i]), s1);
  for (std::size_t i = p.b1_offset(); i < p.w2_offset(); ++i) EXPECT_EQ(p.values()[i], 0.0);
  for (std::size_t i = p.w2_offset(); i < p.b2_offset(); ++i) EXPECT_LE(std::abs(p.values()[i]), s2);
  for (std::size_t i = p.b2_offset(); i < p.size(); ++i) EXPECT_EQ(p.values()[i], 0.0);
  EXPECT_EQ(p, init_params(Architecture::mlp, 6, 3, 10, 9));
  EXPECT_NE(p, init_params(Architecture::mlp, 6, 3, 10, 10));
}

TEST(Grad, ConfidentModelHasZeroGradient) {
  ModelParams p(Architecture::softmax_linear, 1, 2);
  auto v = p.values();
  v[p.w1_offset() + 0] = -100;
  v[p.w1_offset() + 1] = 100;
  Batch b{{{1.0}, {-1.0}}, {1, 0}};
  for (double g : grad(p, b.inputs()).grad) EXPECT_NEAR(g, 0.0, 1e-9);
}

TEST(Grad, MatchesFiniteDifferences) {
  Rng rng(17);
  for (auto arch : {Architecture::softmax_linear, Architecture::mlp}) {
    for (int draw = 0; draw < 20; ++draw) {
      const std::size_t d = 1 + rng.below(4), m = 2 + rng.below(4);
      auto p = init_params(arch, d, m, 5, rng.next());
      for (auto& v : p.values()) v += 0.3 * rng.normal();  // nonzero biases too
      const auto b = random_batch(rng, 6, d, m);
      ASSERT_LT(fd_error(p, b.inputs()), 1e-5) << "draw " << draw;
    }
  }
}

TEST(Grad, DuplicatedBatchSameGradient) {
  Rng rng(4);
  const auto p = init_params(Architecture::mlp, 3, 3, 6, 2);
  const auto b = random_batch(rng, 5, 3, 3);
  auto once = b.inputs();
  auto twice = once;
  twice.insert(twice.end(), once.begin(), once.end());
  const auto g1 = grad(p, once).grad, g2 = grad(p, twice).grad;
  for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g1[i], g2[i], 1e-15);
  EXPECT_THROW(grad(p, std::vector<LabeledInput>{}), DataError);
}

TEST(Optimizer, SgdStep) {
  Optimizer opt({OptimizerKind::sgd, 0.1});
  std::vector<double> theta{1.0};
  opt.step(theta, std::vector<double>{2.0});
  EXPECT_DOUBLE_EQ(theta[0], 0.8);
  opt.step(theta, std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(theta[0], 0.8);
}

TEST(Optimizer, AdamFirstStepIsLearningRate) {
  for (double c : {1e-3, 0.5, 2.0, 1e4}) {
    Optimizer opt({OptimizerKind::adam, 0.01});
    std::vector<double> theta{0.0, 3.0};
    opt.step(theta, std::vector<double>{c, 0.0});
    // m_hat = c, v_hat = c^2, so the step is lr * c / (c + eps).
    EXPECT_NEAR(theta[0], -0.01 * c / (c + 1e-8), 1e-15);
    EXPECT_NEAR(theta[0], -0.01, 1e-7);
    EXPECT_EQ(theta[1], 3.0);
  }
}

TEST(Optimizer, RejectsBadInput) {
  Optimizer opt({OptimizerKind::adam, 0.01});
  std::vector<double> theta{0.0};
  EXPECT_THROW(opt.step(theta, std::vector<double>{std::numeric_limits<double>::infinity()}), NumericError);
  EXPECT_THROW(opt.step(theta, std::vector<double>{1.0, 2.0}), DataError);
  EXPECT_THROW(Optimizer({OptimizerKind::sgd, 0.0}), UsageError);
  EXPECT_THROW(Optimizer({OptimizerKind::adam, 0.1, 1.0}), UsageError);
}
