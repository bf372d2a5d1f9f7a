#include <gtest/gtest.h>

#include <vector>

#include "lmm/label_history.hpp"

using namespace lmm;

namespace {

LabelSpace classes(std::size_t m) { return LabelSpace{m, {}}; }

std::vector<double> one_hot(std::size_t m, Label c) {
  std::vector<double> v(m, 0.0);
  v[c] = 1.0;
  return v;
}

}  // namespace

TEST(Record, RingKeepsLastT) {
  HistoryStore store(1, 3, classes(2));
  for (int e = 1; e <= 5; ++e) store.record(0, e, one_hot(2, e % 2));
  const auto& w = store.window(0);
  ASSERT_TRUE(w.full());
  EXPECT_EQ(w.epoch(0), 3);
  EXPECT_EQ(w.epoch(1), 4);
  EXPECT_EQ(w.epoch(2), 5);
  EXPECT_EQ(w.predicted(0), 1u);
  EXPECT_EQ(w.predicted(1), 0u);
}

TEST(Record, RenormalizesWithinTolerance) {
  HistoryStore store(1, 2, classes(2));
  store.record(0, 1, std::vector<double>{0.5, 0.499999});
  const auto p = store.window(0).probs(0);
  EXPECT_DOUBLE_EQ(p[0] + p[1], 1.0);
  EXPECT_DOUBLE_EQ(p[0], 0.5 / 0.999999);
  EXPECT_THROW(store.record(0, 2, std::vector<double>{0.5, 0.4}), DataError);
}

TEST(Record, Errors) {
  HistoryStore store(2, 3, classes(3));
  store.record(0, 5, one_hot(3, 0));
  EXPECT_THROW(store.record(0, 4, one_hot(3, 0)), DataError);
  EXPECT_THROW(store.record(0, 5, one_hot(3, 0)), DataError);
  EXPECT_THROW(store.record(1, 1, one_hot(2, 0)), DataError);
  EXPECT_THROW(store.record(1, 1, std::vector<double>{1.5, -0.5, 0.0}), DataError);
  EXPECT_THROW(store.record(2, 1, one_hot(3, 0)), std::out_of_range);
  EXPECT_THROW(HistoryStore(1, 0, classes(2)), UsageError);
}

TEST(Uncertainty, NeedsFullWindow) {
  HistoryStore store(1, 3, classes(2));
  store.record(0, 1, one_hot(2, 0));
  store.record(0, 2, one_hot(2, 0));
  EXPECT_FALSE(store.predictive_uncertainty(0).has_value());
  store.record(0, 3, one_hot(2, 0));
  EXPECT_EQ(store.predictive_uncertainty(0), 0.0);
}

TEST(Uncertainty, DistinctClassesGiveOne) {
  HistoryStore store(1, 4, classes(4));
  for (int e = 1; e <= 4; ++e) store.record(0, e, one_hot(4, static_cast<Label>(e - 1)));
  EXPECT_NEAR(*store.predictive_uncertainty(0), 1.0, 1e-15);
}

TEST(Uncertainty, ThreeTwoSplit) {
  HistoryStore store(1, 5, classes(2));
  const Label seq[] = {0, 0, 0, 1, 1};
  for (int e = 0; e < 5; ++e) store.record(0, e + 1, std::vector<double>{seq[e] ? 0.3 : 0.8, seq[e] ? 0.7 : 0.2});
  EXPECT_NEAR(*store.predictive_uncertainty(0), 0.9709505944546688, 1e-12);
}

TEST(Uncertainty, PermutationInvariantAndBounded) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng.below(4), t = 1 + rng.below(8);
    std::vector<Label> seq(t);
    for (auto& c : seq) c = rng.below(m);
    HistoryStore a(1, t, classes(m)), b(1, t, classes(m));
    auto shuffled = seq;
    rng.shuffle(std::span<Label>(shuffled));
    for (std::size_t i = 0; i < t; ++i) {
      a.record(0, static_cast<int>(i), one_hot(m, seq[i]));
      b.record(0, static_cast<int>(i), one_hot(m, shuffled[i]));
    }
    const double ua = *a.predictive_uncertainty(0);
    EXPECT_NEAR(ua, *b.predictive_uncertainty(0), 1e-12);
    EXPECT_GE(ua, 0.0);
    EXPECT_LE(ua, 1.0);
  }
}

TEST(Gate, Examples) {
  HistoryStore store(3, 5, classes(2));
  const Label noisy[] = {0, 0, 0, 1, 1};
  for (int e = 1; e <= 5; ++e) {
    store.record(0, e, one_hot(2, 1));
    store.record(1, e, one_hot(2, noisy[e - 1]));
  }
  RefurbishedSet psi;
  EXPECT_TRUE(is_refurbishable(store, 0, 0.4, psi));   // uncertainty 0
  EXPECT_FALSE(is_refurbishable(store, 1, 0.4, psi));  // uncertainty 0.971
  EXPECT_FALSE(is_refurbishable(store, 2, 0.4, psi));  // empty window
  psi.assign(1, {0, {1.0, 0.0}, 3});
  psi.assign(2, {0, {1.0, 0.0}, 3});
  EXPECT_TRUE(is_refurbishable(store, 1, 0.4, psi));
  EXPECT_TRUE(is_refurbishable(store, 2, 0.4, psi));
}

TEST(Argmax, LowestIndexWinsTies) {
  EXPECT_EQ(argmax(std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_EQ(argmax(std::vector<double>{0.2, 0.4, 0.4}), 1u);
}
