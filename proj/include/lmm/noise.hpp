#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/error.hpp"
#include "lmm/rng.hpp"

namespace lmm {

/// Row-stochastic label corruption matrix: entry (i, j) is the probability
/// that true label i is observed as j.
class NoiseTransitionMatrix {
 public:
  NoiseTransitionMatrix(std::size_t classes, std::vector<double> entries, double noise_rate)
      : classes_(classes), entries_(std::move(entries)), noise_rate_(noise_rate) {
    if (classes_ < 2) throw DataError("transition matrix needs at least 2 classes");
    if (entries_.size() != classes_ * classes_) throw DataError("transition matrix must be square");
    for (std::size_t i = 0; i < classes_; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < classes_; ++j) {
        const double p = at(i, j);
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("transition entries must lie in [0, 1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw DataError("transition row " + std::to_string(i) + " does not sum to 1");
    }
  }

  std::size_t size() const noexcept { return classes_; }
  double noise_rate() const noexcept { return noise_rate_; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * classes_ + j]; }
  std::span<const double> row(std::size_t i) const { return std::span<const double>(entries_).subspan(i * classes_, classes_); }

  std::string to_table() const {
    std::string out;
    for (std::size_t i = 0; i < classes_; ++i) {
      for (std::size_t j = 0; j < classes_; ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%.6f", j ? " " : "", at(i, j));
        out += buf;
      }
      out += "\n";
    }
    return out;
  }

 private:
  std::size_t classes_;
  std::vector<double> entries_;
  double noise_rate_;
};

/// Symmetric noise: 1 - gamma on the diagonal, gamma / (M - 1) elsewhere.
inline NoiseTransitionMatrix symmetric_matrix(std::size_t classes, double gamma) {
  if (classes < 2) throw DataError("symmetric noise needs at least 2 classes");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DataError("noise rate must lie in [0, 1]");
  const double off = gamma / static_cast<double>(classes - 1);
  std::vector<double> entries(classes * classes, off);
  for (std::size_t i = 0; i < classes; ++i) {
    entries[i * classes + i] = 1.0 - gamma;
    // Absorb rounding so the row sums to 1 as exactly as representable.
    double sum = 0.0;
    for (std::size_t j = 0; j < classes; ++j) sum += entries[i * classes + j];
    entries[i * classes + i] += 1.0 - sum;
  }
  return NoiseTransitionMatrix(classes, std::move(entries), gamma);
}

struct LabelFlip {
  SampleId id;
  Label old_label;
  Label new_label;
  friend bool operator==(const LabelFlip&, const LabelFlip&) = default;
};

struct NoisyDataset {
  Dataset data;
  std::vector<LabelFlip> flips;
};

/// Redraws each observed label from its matrix row, in id order. Samples
/// without ground truth get their pre-injection label recorded as truth.
inline NoisyDataset inject(const Dataset& data, const NoiseTransitionMatrix& matrix, std::uint64_t seed) {
  if (matrix.size() != data.num_classes())
    throw DataError("transition matrix is " + std::to_string(matrix.size()) + "x" + std::to_string(matrix.size()) +
                    " but dataset has " + std::to_string(data.num_classes()) + " classes");
  Rng rng = Rng(seed).split(stream::noise);
  std::vector<Sample> samples(data.samples().begin(), data.samples().end());
  std::vector<LabelFlip> flips;
  for (Sample& s : samples) {
    const Label old = s.observed_label;
    if (!s.truth_label) s.truth_label = old;
    const Label drawn = rng.categorical(matrix.row(old));
    if (drawn != old) {
      flips.push_back({s.id, old, drawn});
      s.observed_label = drawn;
    }
  }
  return {Dataset(std::move(samples), data.label_space(), data.feature_dim()), std::move(flips)};
}

inline std::string flip_log_csv(std::span<const LabelFlip> flips) {
  std::string out = "id,old_label,new_label\n";
  for (const auto& f : flips)
    out += std::to_string(f.id) + "," + std::to_string(f.old_label) + "," + std::to_string(f.new_label) + "\n";
  return out;
}

}  // namespace lmm
