#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lmm/error.hpp"

namespace lmm {

/// Upper end of the validation-loss band: the cross-entropy of a prediction
/// that puts exactly 1/M on the true class, ln M.
inline double l_upper(std::size_t num_classes) {
  if (num_classes < 2) throw UsageError("l_upper needs at least 2 classes");
  return -std::log(1.0 / static_cast<double>(num_classes));
}

struct StartupConfig {
  int warmup_epochs = 10;
  double relaxation = 0.0;  // phi, in [-0.1, 0.1]
  double loss_lower = 0.0;  // L_a
  double noise_rate = 0.0;  // gamma, in [0, 1)

  /// Throws on invalid values; returns human-readable warnings otherwise.
  std::vector<std::string> validate(std::size_t num_classes) const {
    if (warmup_epochs < 0) throw UsageError("warmup_epochs must be >= 0");
    if (!(relaxation >= -0.1 && relaxation <= 0.1)) throw UsageError("relaxation factor must lie in [-0.1, 0.1]");
    if (!(loss_lower >= 0.0)) throw UsageError("loss_lower must be >= 0");
    if (!(noise_rate >= 0.0 && noise_rate < 1.0)) throw UsageError("noise rate must lie in [0, 1)");
    if (!(loss_lower < l_upper(num_classes))) throw UsageError("loss_lower must be below ln(M)");
    std::vector<std::string> warnings;
    if (noise_rate + relaxation >= 1.0)
      warnings.push_back("gamma + phi >= 1: the validation-accuracy condition is always satisfied");
    if (1.0 - noise_rate - relaxation >= 1.0)
      warnings.push_back("1 - gamma - phi >= 1: the validation-accuracy condition can never be satisfied");
    return warnings;
  }
};

/// Latching launch decision. Active from the first epoch after warm-up at
/// which the validation loss lies in [L_a, ln M] and the validation accuracy
/// exceeds 1 - gamma - phi; stays active afterwards.
class StartupMonitor {
 public:
  StartupMonitor(StartupConfig config, std::size_t num_classes)
      : config_(config), upper_(l_upper(num_classes)) {
    config_.validate(num_classes);
  }

  const StartupConfig& config() const noexcept { return config_; }
  double loss_upper() const noexcept { return upper_; }
  double accuracy_threshold() const noexcept { return 1.0 - config_.noise_rate - config_.relaxation; }
  bool triggered() const noexcept { return trigger_epoch_.has_value(); }
  std::optional<int> trigger_epoch() const noexcept { return trigger_epoch_; }

  bool check(int epoch, double val_loss, double val_acc) {
    if (last_epoch_ && epoch <= *last_epoch_)
      throw UsageError("startup monitor epochs must increase (" + std::to_string(epoch) + " after " +
                       std::to_string(*last_epoch_) + ")");
    if (!(val_loss >= 0.0)) throw DataError("validation loss must be >= 0");
    if (!(val_acc >= 0.0 && val_acc <= 1.0)) throw DataError("validation accuracy must lie in [0, 1]");
    last_epoch_ = epoch;
    if (trigger_epoch_) return true;
    if (epoch <= config_.warmup_epochs) return false;
    const bool loss_ok = val_loss >= config_.loss_lower && val_loss <= upper_;
    const bool acc_ok = val_acc > accuracy_threshold();
    if (loss_ok && acc_ok) trigger_epoch_ = epoch;
    return trigger_epoch_.has_value();
  }

 private:
  StartupConfig config_;
  double upper_;
  std::optional<int> trigger_epoch_;
  std::optional<int> last_epoch_;
};

}  // namespace lmm
