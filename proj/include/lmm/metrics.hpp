#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/error.hpp"

namespace lmm {

namespace detail {
inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DataError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}
}  // namespace detail

/// Fraction of samples whose current label equals ground truth.
inline double data_purity(const Dataset& data, std::span<const Label> current_labels) {
  detail::require_same_length(data.size(), current_labels.size(), "data_purity");
  if (data.empty()) throw DataError("data_purity of an empty dataset");
  std::size_t match = 0;
  for (const Sample& s : data.samples()) {
    if (!s.truth_label) throw DataError("data_purity needs ground truth for every sample");
    if (current_labels[s.id] == *s.truth_label) ++match;
  }
  return static_cast<double>(match) / static_cast<double>(data.size());
}

inline double accuracy(std::span<const Label> predictions, std::span<const Label> labels) {
  detail::require_same_length(predictions.size(), labels.size(), "accuracy");
  if (labels.empty()) throw DataError("accuracy of an empty list");
  std::size_t match = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) match += predictions[i] == labels[i];
  return static_cast<double>(match) / static_cast<double>(labels.size());
}

/// Chance-corrected agreement. When chance agreement is 1 the result is 1 for
/// identical inputs and 0 otherwise.
inline double cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
  detail::require_same_length(a.size(), b.size(), "cohen_kappa");
  if (a.empty()) throw DataError("cohen_kappa of empty lists");
  const std::size_t m = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end())) + 1;
  std::vector<double> ca(m, 0.0), cb(m, 0.0);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    agree += a[i] == b[i];
  }
  const double n = static_cast<double>(a.size());
  const double po = static_cast<double>(agree) / n;
  double pe = 0.0;
  for (std::size_t j = 0; j < m; ++j) pe += (ca[j] / n) * (cb[j] / n);
  if (pe >= 1.0) return agree == a.size() ? 1.0 : 0.0;
  if (agree == a.size()) return 1.0;
  return (po - pe) / (1.0 - pe);
}

/// Mann-Whitney AUC with midranks for tied scores; `is_positive(i)` labels
/// sample i.
template <typename IsPositive>
double auc_by(std::span<const double> scores, IsPositive&& is_positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (is_positive(order[k])) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("auc needs both positive and negative samples");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Binary AUC from class-1 scores and 0/1 labels.
inline double auc(std::span<const double> scores, std::span<const Label> labels) {
  detail::require_same_length(scores.size(), labels.size(), "auc");
  for (Label y : labels)
    if (y > 1) throw DataError("binary auc needs labels in {0, 1}");
  return auc_by(scores, [&](std::size_t i) { return labels[i] == 1; });
}

/// Macro one-vs-rest AUC from per-sample probability rows; classes absent
/// from `labels` are skipped. For M = 2 this is the binary AUC on column 1.
inline double macro_auc(std::span<const std::vector<double>> probs, std::span<const Label> labels,
                        std::size_t num_classes) {
  detail::require_same_length(probs.size(), labels.size(), "macro_auc");
  std::vector<double> col(probs.size());
  auto column = [&](std::size_t c) {
    for (std::size_t i = 0; i < probs.size(); ++i) col[i] = probs[i].at(c);
  };
  if (num_classes == 2) {
    column(1);
    return auc(col, labels);
  }
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto np = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c));
    if (np == 0 || np == labels.size()) continue;
    column(c);
    total += auc_by(col, [&](std::size_t i) { return labels[i] == c; });
    ++used;
  }
  if (used == 0) throw DataError("macro_auc needs at least two classes present");
  return total / static_cast<double>(used);
}

/// Counts (reference i, compared j).
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes) : m_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t size() const noexcept { return m_; }
  std::uint64_t at(std::size_t i, std::size_t j) const { return counts_.at(i * m_ + j); }
  void add(Label ref, Label cmp) {
    if (ref >= m_ || cmp >= m_) throw DataError("confusion label out of range");
    ++counts_[ref * m_ + cmp];
  }
  std::uint64_t row_total(std::size_t i) const {
    std::uint64_t t = 0;
    for (std::size_t j = 0; j < m_; ++j) t += at(i, j);
    return t;
  }
  std::uint64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

  /// Row-normalized rates; empty rows stay zero.
  std::vector<double> row_normalized() const {
    std::vector<double> out(counts_.size(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double t = static_cast<double>(row_total(i));
      if (t == 0.0) continue;
      for (std::size_t j = 0; j < m_; ++j) out[i * m_ + j] = static_cast<double>(at(i, j)) / t;
    }
    return out;
  }

  std::string to_table(bool normalized = false) const {
    const auto rates = row_normalized();
    std::string out;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        char buf[32];
        if (normalized)
          std::snprintf(buf, sizeof(buf), "%s%.4f", j ? " " : "", rates[i * m_ + j]);
        else
          std::snprintf(buf, sizeof(buf), "%s%llu", j ? " " : "", static_cast<unsigned long long>(at(i, j)));
        out += buf;
      }
      out += "\n";
    }
    return out;
  }

 private:
  std::size_t m_;
  std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const Label> reference, std::span<const Label> compared,
                                 std::size_t num_classes) {
  detail::require_same_length(reference.size(), compared.size(), "confusion");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < reference.size(); ++i) cm.add(reference[i], compared[i]);
  return cm;
}

}  // namespace lmm
