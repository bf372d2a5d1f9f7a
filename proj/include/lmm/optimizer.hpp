#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lmm/error.hpp"
#include "lmm/model.hpp"

namespace lmm {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (!(learning_rate > 0.0)) throw UsageError("learning rate must be > 0");
    if (kind == OptimizerKind::adam) {
      if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw UsageError("adam betas must lie in [0, 1)");
      if (!(epsilon > 0.0)) throw UsageError("adam epsilon must be > 0");
    }
  }
};

/// Optimizer state. Adam keeps first and second moments shaped like the
/// parameter vector and applies bias correction.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

  const OptimizerConfig& config() const noexcept { return config_; }
  long steps() const noexcept { return steps_; }

  void step(std::span<double> params, std::span<const double> gradient) {
    if (params.size() != gradient.size()) throw DataError("gradient shape does not match parameters");
    for (double gi : gradient)
      if (!std::isfinite(gi)) throw NumericError("non-finite gradient");
    ++steps_;
    const double lr = config_.learning_rate;
    if (config_.kind == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * gradient[i];
      return;
    }
    if (m_.size() != params.size()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
    }
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * gradient[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * gradient[i] * gradient[i];
      const double m_hat = m_[i] / c1;
      const double v_hat = v_[i] / c2;
      params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }

  void step(ModelParams& params, std::span<const double> gradient) { step(params.values(), gradient); }

 private:
  OptimizerConfig config_;
  long steps_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace lmm
