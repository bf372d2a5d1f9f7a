#include <gtest/gtest.h>

#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/metrics.hpp"
#include "lmm/noise.hpp"

using namespace lmm;

namespace {

Dataset with_truth(const std::vector<Label>& truth, std::size_t m) {
  std::vector<Sample> s;
  for (std::size_t i = 0; i < truth.size(); ++i) s.push_back({i, {0.0}, truth[i], truth[i]});
  return Dataset(std::move(s), LabelSpace{m, {}}, 1);
}

}  // namespace

TEST(Purity, Examples) {
  const auto d = with_truth({0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, 2);
  auto labels = d.observed_labels();
  EXPECT_EQ(data_purity(d, labels), 1.0);
  labels[0] = 1;
  labels[3] = 0;
  EXPECT_DOUBLE_EQ(data_purity(d, labels), 0.8);
  EXPECT_THROW(data_purity(d, std::vector<Label>{0}), DataError);
  const auto no_truth = parse_csv("f0,label\n0,1\n");
  EXPECT_THROW(data_purity(no_truth, no_truth.observed_labels()), DataError);
}

TEST(Purity, AfterInjectionNearOneMinusGamma) {
  const auto d = synth_gaussians(GaussianMixtureSpec::two_class(), 10000, 1);
  const auto n = inject(d, symmetric_matrix(2, 0.2), 2);
  EXPECT_NEAR(data_purity(n.data, n.data.observed_labels()), 0.8, 3 * std::sqrt(0.16 / 20000));
}

TEST(Kappa, Examples) {
  const std::vector<Label> a{0, 1, 2, 0, 1};
  EXPECT_EQ(cohen_kappa(a, a), 1.0);
  // Uniform marginals, agreement on exactly half.
  EXPECT_DOUBLE_EQ(cohen_kappa(std::vector<Label>{0, 0, 1, 1}, std::vector<Label>{0, 1, 0, 1}), 0.0);
  EXPECT_EQ(cohen_kappa(std::vector<Label>{2, 2, 2}, std::vector<Label>{2, 2, 2}), 1.0);
  EXPECT_THROW(cohen_kappa(a, std::vector<Label>{0}), DataError);
  EXPECT_THROW(cohen_kappa(std::vector<Label>{}, std::vector<Label>{}), DataError);
}

TEST(Kappa, HandComputed) {
  // po = 0.75, pe = 0.5*0.75 + 0.5*0.25 = 0.5, kappa = 0.5.
  EXPECT_DOUBLE_EQ(cohen_kappa(std::vector<Label>{0, 0, 1, 1}, std::vector<Label>{0, 0, 0, 1}), 0.5);
}

TEST(Kappa, SymmetricNoiseFiveClasses) {
  const auto d = synth_gaussians(GaussianMixtureSpec::polygon(5, 4.0), 20000, 3);
  const auto n = inject(d, symmetric_matrix(5, 0.1), 4);
  EXPECT_NEAR(cohen_kappa(n.data.observed_labels(), n.data.truth_labels()), 0.875, 0.01);
}

TEST(Accuracy, Examples) {
  const std::vector<Label> y{0, 1, 1, 0};
  EXPECT_EQ(accuracy(y, y), 1.0);
  EXPECT_EQ(accuracy(std::vector<Label>{1, 0, 0, 1}, y), 0.0);
  EXPECT_EQ(accuracy(std::vector<Label>{0, 1, 1, 1}, y), 0.75);
}

TEST(Auc, Examples) {
  const std::vector<Label> y{0, 0, 1, 1};
  EXPECT_EQ(auc(std::vector<double>{0, 0, 1, 1}, y), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, y), 0.5);
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, y), 0.75);
  EXPECT_EQ(auc(std::vector<double>{1, 1, 0, 0}, y), 0.0);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<Label>{1, 1}), DataError);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<Label>{0, 2}), DataError);
}

TEST(Auc, MatchesPairCount) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(30);
    std::vector<Label> y(30);
    for (std::size_t i = 0; i < 30; ++i) {
      s[i] = static_cast<double>(rng.below(6));  // many ties
      y[i] = i % 3 == 0;
    }
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < 30; ++i)
      for (std::size_t j = 0; j < 30; ++j)
        if (y[i] == 1 && y[j] == 0) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    ASSERT_NEAR(auc(s, y), wins / pairs, 1e-12);
  }
}

TEST(Auc, MacroOneVsRest) {
  const std::vector<std::vector<double>> probs{{0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}, {0.5, 0.3, 0.2}};
  EXPECT_DOUBLE_EQ(macro_auc(probs, std::vector<Label>{0, 1, 2, 0}, 3), 1.0);
  const std::vector<std::vector<double>> bin{{0.9, 0.1}, {0.6, 0.4}, {0.65, 0.35}, {0.2, 0.8}};
  EXPECT_EQ(macro_auc(bin, std::vector<Label>{0, 0, 1, 1}, 2), 0.75);
}

TEST(Confusion, IdentityIsDiagonal) {
  const std::vector<Label> y{0, 1, 2, 2, 1};
  const auto cm = confusion(y, y, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_EQ(cm.at(i, j), 0u);
      }
  EXPECT_EQ(cm.at(2, 2), 2u);
  EXPECT_EQ(cm.total(), 5u);
  EXPECT_EQ(cm.to_table(), "1 0 0\n0 2 0\n0 0 2\n");
  EXPECT_THROW(confusion(y, std::vector<Label>{0, 1, 3, 2, 1}, 3), DataError);
}

TEST(Confusion, OffDiagonalsEmptyIffPure) {
  const auto d = synth_gaussians(GaussianMixtureSpec::polygon(4, 2.0), 100, 1);
  for (double g : {0.0, 0.05}) {
    const auto n = inject(d, symmetric_matrix(4, g), 1);
    const auto cm = confusion(n.data.truth_labels(), n.data.observed_labels(), 4);
    std::uint64_t off = 0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) off += i != j ? cm.at(i, j) : 0;
    EXPECT_EQ(off == 0, data_purity(n.data, n.data.observed_labels()) == 1.0);
  }
}
