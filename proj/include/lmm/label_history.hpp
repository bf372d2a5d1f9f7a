#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/error.hpp"
#include "lmm/format.hpp"
#include "lmm/refurbished_set.hpp"

namespace lmm {

/// Index of the largest entry; the lowest index wins ties.
inline Label argmax(std::span<const double> v) {
  Label best = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (v[j] > v[best]) best = j;
  return best;
}

/// Ring buffer of the last T (epoch, probability vector) records of one sample.
class PredictionWindow {
 public:
  PredictionWindow(std::size_t capacity, std::size_t num_classes)
      : capacity_(capacity), classes_(num_classes), epochs_(capacity), probs_(capacity * num_classes) {
    if (capacity_ < 1) throw UsageError("window capacity must be >= 1");
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t num_classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return count_; }
  bool full() const noexcept { return count_ == capacity_; }
  std::optional<int> last_epoch() const {
    if (count_ == 0) return std::nullopt;
    return epochs_[slot(count_ - 1)];
  }

  // Position 0 is the oldest entry, size()-1 the newest.
  int epoch(std::size_t pos) const { return epochs_[slot(checked(pos))]; }
  std::span<const double> probs(std::size_t pos) const {
    return std::span<const double>(probs_).subspan(slot(checked(pos)) * classes_, classes_);
  }
  Label predicted(std::size_t pos) const { return argmax(probs(pos)); }

  /// Appends a record, evicting the oldest when full. `probs` must already be
  /// validated and normalized.
  void push(int epoch, std::span<const double> probs) {
    if (auto last = last_epoch(); last && epoch <= *last)
      throw DataError("epoch " + std::to_string(epoch) + " is not after last recorded epoch " + std::to_string(*last));
    std::size_t s;
    if (count_ < capacity_) {
      s = slot(count_);
      ++count_;
    } else {
      s = head_;
      head_ = (head_ + 1) % capacity_;
    }
    epochs_[s] = epoch;
    std::copy(probs.begin(), probs.end(), probs_.begin() + static_cast<std::ptrdiff_t>(s * classes_));
  }

 private:
  std::size_t slot(std::size_t pos) const noexcept { return (head_ + pos) % capacity_; }
  std::size_t checked(std::size_t pos) const {
    if (pos >= count_) throw std::out_of_range("window position out of range");
    return pos;
  }

  std::size_t capacity_;
  std::size_t classes_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  std::vector<int> epochs_;
  std::vector<double> probs_;
};

/// Prediction windows for every sample of a training set.
class HistoryStore {
 public:
  HistoryStore(std::size_t num_samples, std::size_t capacity, LabelSpace labels)
      : capacity_(capacity), labels_(std::move(labels)) {
    labels_.validate();
    windows_.assign(num_samples, PredictionWindow(capacity, labels_.num_classes));
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return windows_.size(); }
  const LabelSpace& label_space() const noexcept { return labels_; }
  const PredictionWindow& window(SampleId id) const { return windows_.at(id); }

  /// Stores a probability vector; sums within 1e-6 of 1 are renormalized.
  void record(SampleId id, int epoch, std::span<const double> probs) {
    PredictionWindow& w = windows_.at(id);
    if (probs.size() != labels_.num_classes)
      throw DataError("probability vector has length " + std::to_string(probs.size()) + ", expected " +
                      std::to_string(labels_.num_classes));
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw DataError("probability vector has a negative or non-finite entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw DataError("probability vector sums to " + format_double(sum));
    scratch_.assign(probs.begin(), probs.end());
    for (double& p : scratch_) p /= sum;
    w.push(epoch, scratch_);
  }

  /// Normalized entropy of the argmax labels in a full window; nullopt while
  /// the window holds fewer than T records.
  std::optional<double> predictive_uncertainty(SampleId id) const {
    const PredictionWindow& w = windows_.at(id);
    if (!w.full()) return std::nullopt;
    const std::size_t m = labels_.num_classes;
    std::vector<std::size_t> counts(m, 0);
    for (std::size_t i = 0; i < w.size(); ++i) ++counts[w.predicted(i)];
    double h = 0.0;
    for (std::size_t c : counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / static_cast<double>(w.size());
      h -= p * std::log(p);
    }
    return std::clamp(h / std::log(static_cast<double>(m)), 0.0, 1.0);
  }

  /// Debug dump: sample_id,epoch,p_0..p_{M-1}, oldest record first.
  std::string to_csv() const {
    std::string out = "sample_id,epoch";
    for (std::size_t j = 0; j < labels_.num_classes; ++j) out += ",p_" + std::to_string(j);
    out += "\n";
    for (SampleId id = 0; id < windows_.size(); ++id) {
      const auto& w = windows_[id];
      for (std::size_t i = 0; i < w.size(); ++i) {
        out += std::to_string(id) + "," + std::to_string(w.epoch(i));
        for (double p : w.probs(i)) out += "," + format_double(p);
        out += "\n";
      }
    }
    return out;
  }

 private:
  std::size_t capacity_;
  LabelSpace labels_;
  std::vector<PredictionWindow> windows_;
  std::vector<double> scratch_;
};

/// Gate for refurbishment: a confident full window, or prior membership.
inline bool is_refurbishable(const HistoryStore& store, SampleId id, double epsilon, const RefurbishedSet& psi) {
  if (psi.contains(id)) return true;
  const auto u = store.predictive_uncertainty(id);
  return u && *u <= epsilon;
}

}  // namespace lmm
