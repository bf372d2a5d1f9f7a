#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/error.hpp"
#include "lmm/rng.hpp"

namespace lmm {

enum class Architecture { softmax_linear, mlp };

/// Parameters of a small dense classifier, stored in one flat buffer so the
/// optimizer can treat them as a vector.
///
/// softmax_linear: W [M x d], b [M]
/// mlp:            W1 [h x d], b1 [h], W2 [M x h], b2 [M], ReLU hidden layer
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(Architecture arch, std::size_t input_dim, std::size_t num_classes, std::size_t hidden = 0)
      : arch_(arch), input_(input_dim), classes_(num_classes), hidden_(arch == Architecture::mlp ? hidden : 0) {
    if (input_ == 0) throw UsageError("model input dimension must be >= 1");
    if (classes_ < 2) throw UsageError("model needs at least 2 output classes");
    if (arch_ == Architecture::mlp && hidden_ == 0) throw UsageError("mlp needs at least one hidden unit");
    values_.assign(parameter_count(), 0.0);
  }

  Architecture architecture() const noexcept { return arch_; }
  std::size_t input_dim() const noexcept { return input_; }
  std::size_t num_classes() const noexcept { return classes_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  // Offsets of each block within values().
  std::size_t first_in() const noexcept { return arch_ == Architecture::mlp ? hidden_ : classes_; }
  std::size_t w1_offset() const noexcept { return 0; }
  std::size_t b1_offset() const noexcept { return first_in() * input_; }
  std::size_t w2_offset() const noexcept { return b1_offset() + first_in(); }
  std::size_t b2_offset() const noexcept { return w2_offset() + classes_ * hidden_; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::size_t parameter_count() const noexcept {
    if (arch_ == Architecture::softmax_linear) return classes_ * input_ + classes_;
    return hidden_ * input_ + hidden_ + classes_ * hidden_ + classes_;
  }

  Architecture arch_ = Architecture::softmax_linear;
  std::size_t input_ = 0, classes_ = 0, hidden_ = 0;
  std::vector<double> values_;
};

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
inline ModelParams init_params(Architecture arch, std::size_t input_dim, std::size_t num_classes, std::size_t hidden,
                               std::uint64_t seed) {
  ModelParams p(arch, input_dim, num_classes, hidden);
  Rng rng = Rng(seed).split(stream::init);
  auto v = p.values();
  auto fill = [&](std::size_t offset, std::size_t fan_out, std::size_t fan_in) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t k = 0; k < fan_out * fan_in; ++k) v[offset + k] = rng.uniform(-s, s);
  };
  fill(p.w1_offset(), p.first_in(), input_dim);
  if (arch == Architecture::mlp) fill(p.w2_offset(), num_classes, p.hidden());
  return p;
}

/// In-place softmax with max subtraction.
inline void softmax(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

namespace detail {

// Hidden activations (mlp only) and logits for one input.
inline void forward_pass(const ModelParams& params, std::span<const double> x, std::vector<double>& hidden,
                         std::vector<double>& logits) {
  const auto v = params.values();
  const std::size_t m = params.num_classes();
  auto affine = [&](std::size_t w_off, std::size_t b_off, std::size_t out_n, std::span<const double> in,
                    std::vector<double>& out) {
    out.resize(out_n);
    for (std::size_t r = 0; r < out_n; ++r) {
      double acc = v[b_off + r];
      const double* w = v.data() + w_off + r * in.size();
      for (std::size_t c = 0; c < in.size(); ++c) acc += w[c] * in[c];
      out[r] = acc;
    }
  };
  if (params.architecture() == Architecture::softmax_linear) {
    affine(params.w1_offset(), params.b1_offset(), m, x, logits);
    return;
  }
  affine(params.w1_offset(), params.b1_offset(), params.hidden(), x, hidden);
  for (double& h : hidden) h = std::max(h, 0.0);
  affine(params.w2_offset(), params.b2_offset(), m, hidden, logits);
}

inline void check_input(const ModelParams& params, std::span<const double> x) {
  if (x.size() != params.input_dim())
    throw DataError("input has " + std::to_string(x.size()) + " features, model expects " +
                    std::to_string(params.input_dim()));
  for (double f : x)
    if (std::isnan(f)) throw DataError("NaN in model input");
}

}  // namespace detail

/// Class probabilities for one input.
inline std::vector<double> forward(const ModelParams& params, std::span<const double> x) {
  detail::check_input(params, x);
  std::vector<double> hidden, logits;
  detail::forward_pass(params, x, hidden, logits);
  softmax(logits);
  return logits;
}

inline constexpr double kProbFloor = 1e-12;

/// -ln p[label], with p clamped at 1e-12.
inline double xent_loss(std::span<const double> probs, Label label) {
  if (label >= probs.size()) throw DataError("label " + std::to_string(label) + " out of range");
  return -std::log(std::max(probs[label], kProbFloor));
}

struct LabeledInput {
  std::span<const double> features;
  Label label;
};

struct LossAndGradient {
  double loss = 0.0;          // mean cross-entropy over the batch
  std::vector<double> grad;   // same layout as ModelParams::values()
};

/// Analytic gradient of the mean cross-entropy over `batch`.
inline LossAndGradient grad(const ModelParams& params, std::span<const LabeledInput> batch) {
  if (batch.empty()) throw DataError("gradient of an empty batch");
  const auto v = params.values();
  const std::size_t d = params.input_dim();
  const std::size_t m = params.num_classes();
  const std::size_t h = params.hidden();
  const bool mlp = params.architecture() == Architecture::mlp;

  LossAndGradient out{0.0, std::vector<double>(params.size(), 0.0)};
  auto& g = out.grad;
  std::vector<double> hidden, logits, dlogits(m), dhidden(h);
  const double scale = 1.0 / static_cast<double>(batch.size());

  for (const auto& ex : batch) {
    detail::check_input(params, ex.features);
    if (ex.label >= m) throw DataError("label out of range in gradient batch");
    detail::forward_pass(params, ex.features, hidden, logits);
    softmax(logits);
    out.loss += xent_loss(logits, ex.label) * scale;
    for (std::size_t j = 0; j < m; ++j) dlogits[j] = (logits[j] - (j == ex.label ? 1.0 : 0.0)) * scale;

    if (!mlp) {
      for (std::size_t j = 0; j < m; ++j) {
        double* gw = g.data() + params.w1_offset() + j * d;
        for (std::size_t c = 0; c < d; ++c) gw[c] += dlogits[j] * ex.features[c];
        g[params.b1_offset() + j] += dlogits[j];
      }
      continue;
    }
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      double* gw = g.data() + params.w2_offset() + j * h;
      const double* w = v.data() + params.w2_offset() + j * h;
      for (std::size_t k = 0; k < h; ++k) {
        gw[k] += dlogits[j] * hidden[k];
        dhidden[k] += dlogits[j] * w[k];
      }
      g[params.b2_offset() + j] += dlogits[j];
    }
    for (std::size_t k = 0; k < h; ++k) {
      if (hidden[k] <= 0.0) continue;  // ReLU gate
      double* gw = g.data() + params.w1_offset() + k * d;
      for (std::size_t c = 0; c < d; ++c) gw[c] += dhidden[k] * ex.features[c];
      g[params.b1_offset() + k] += dhidden[k];
    }
  }
  return out;
}

/// Mean cross-entropy without the gradient.
inline double mean_loss(const ModelParams& params, std::span<const LabeledInput> batch) {
  if (batch.empty()) throw DataError("loss of an empty batch");
  double total = 0.0;
  for (const auto& ex : batch) total += xent_loss(forward(params, ex.features), ex.label);
  return total / static_cast<double>(batch.size());
}

}  // namespace lmm
