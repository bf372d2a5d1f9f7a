#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lmm/error.hpp"
#include "lmm/label_history.hpp"
#include "lmm/refurbished_set.hpp"

namespace lmm {

/// Normalized time weights over a window, oldest first.
struct WeightVector {
  std::vector<double> weights;
  double eta = std::numeric_limits<double>::infinity();

  std::size_t size() const noexcept { return weights.size(); }
  double operator[](std::size_t i) const { return weights[i]; }
};

/// w_i = exp(i / eta) / sum_k exp(k / eta) for i = 1..T, so the newest record
/// gets the largest weight.
inline WeightVector exp_weights(std::size_t window, double eta) {
  if (window < 1) throw UsageError("window width T must be >= 1");
  if (!(eta > 0.0)) throw UsageError("eta must be > 0");
  WeightVector out{std::vector<double>(window), eta};
  // Shifting the exponent by T/eta cancels in the normalization and keeps
  // small eta from overflowing.
  double z = 0.0;
  const double t = static_cast<double>(window);
  for (std::size_t i = 1; i <= window; ++i) {
    out.weights[i - 1] = std::exp((static_cast<double>(i) - t) / eta);
    z += out.weights[i - 1];
  }
  for (double& w : out.weights) w /= z;
  return out;
}

/// The eta -> infinity limit: every record counts equally.
inline WeightVector uniform_weights(std::size_t window) {
  if (window < 1) throw UsageError("window width T must be >= 1");
  return {std::vector<double>(window, 1.0 / static_cast<double>(window)), std::numeric_limits<double>::infinity()};
}

enum class Evidence {
  soft,  // stored probability of the candidate class
  hard,  // 1 when the stored argmax equals the candidate class
};

/// Time-weighted mean of the window's evidence for each class.
inline std::vector<double> likelihood(const PredictionWindow& window, const WeightVector& weights,
                                      Evidence evidence = Evidence::soft) {
  if (!window.full()) throw DataError("likelihood needs a full window");
  if (weights.size() != window.capacity()) throw DataError("weight vector length does not match window width");
  std::vector<double> lik(window.num_classes(), 0.0);
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (evidence == Evidence::soft) {
      const auto p = window.probs(i);
      for (std::size_t j = 0; j < lik.size(); ++j) lik[j] += weights[i] * p[j];
    } else {
      lik[window.predicted(i)] += weights[i];
    }
  }
  return lik;
}

/// prior_j * lik_j / Z. Returns nullopt when Z = 0, meaning no label can be
/// selected for this sample this epoch.
inline std::optional<std::vector<double>> posterior(std::span<const double> prior, std::span<const double> lik) {
  if (prior.size() != lik.size()) throw DataError("prior and likelihood lengths differ");
  double prior_sum = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DataError("prior has a negative or non-finite entry");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-6) throw DataError("prior does not sum to 1");
  for (double l : lik)
    if (!(l >= 0.0) || !std::isfinite(l)) throw DataError("likelihood has a negative or non-finite entry");

  std::vector<double> post(prior.size());
  double z = 0.0;
  for (std::size_t j = 0; j < post.size(); ++j) {
    post[j] = prior[j] * lik[j];
    z += post[j];
  }
  if (!(z > 0.0)) return std::nullopt;
  for (double& p : post) p /= z;
  return post;
}

struct RefurbishConfig {
  std::size_t window = 5;
  double eta = 2.0;
  Evidence evidence = Evidence::soft;
  bool uniform = false;  // ignore eta and weight every record equally

  WeightVector weights() const { return uniform ? uniform_weights(window) : exp_weights(window, eta); }
};

struct RefurbishResult {
  Label label;
  std::vector<double> posterior;
};

/// MAP label from the current model output (prior) and the sample's past
/// window (likelihood). On success the result is written into `psi`.
inline std::optional<RefurbishResult> refurbish(SampleId id, const PredictionWindow& window,
                                                std::span<const double> prior, const WeightVector& weights,
                                                Evidence evidence, int epoch, RefurbishedSet& psi) {
  const auto lik = likelihood(window, weights, evidence);
  auto post = posterior(prior, lik);
  if (!post) return std::nullopt;
  RefurbishResult result{argmax(*post), std::move(*post)};
  psi.assign(id, {result.label, result.posterior, epoch});
  return result;
}

}  // namespace lmm
