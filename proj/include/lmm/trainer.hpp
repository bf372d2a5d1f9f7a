#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/error.hpp"
#include "lmm/label_history.hpp"
#include "lmm/metrics.hpp"
#include "lmm/model.hpp"
#include "lmm/optimizer.hpp"
#include "lmm/refurbisher.hpp"
#include "lmm/rng.hpp"
#include "lmm/startup_monitor.hpp"

namespace lmm {

enum class TrainMode {
  standard,      // "default": plain minibatch training on observed labels
  lmm,           // label management
  uniform_vote,  // lmm with equal weights and hard evidence (ablation)
};

inline std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::standard: return "default";
    case TrainMode::lmm: return "lmm";
    case TrainMode::uniform_vote: return "uniform-vote-ablation";
  }
  return "?";
}

inline TrainMode parse_train_mode(std::string_view s) {
  if (s == "default") return TrainMode::standard;
  if (s == "lmm") return TrainMode::lmm;
  if (s == "uniform-vote-ablation" || s == "uniform-vote") return TrainMode::uniform_vote;
  throw UsageError("unknown mode '" + std::string(s) + "' (expected default, lmm, uniform-vote-ablation)");
}

struct TrainConfig {
  int epochs = 60;
  std::size_t batch_size = 32;
  double gamma = 0.0;  // assumed noise rate of the training labels
  std::size_t window = 5;
  double epsilon = 0.4;
  double eta = 2.0;
  Evidence evidence = Evidence::soft;
  StartupConfig startup;  // startup.noise_rate is overwritten with gamma
  TrainMode mode = TrainMode::lmm;
  std::uint64_t seed = 0;
  Architecture architecture = Architecture::softmax_linear;
  std::size_t hidden = 16;
  OptimizerConfig optimizer;
  bool keep_param_trajectory = false;  // store parameters after every epoch

  void validate() const {
    if (epochs < 0) throw UsageError("epochs must be >= 0");
    if (batch_size < 2) throw UsageError("batch_size must be >= 2");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("gamma must lie in [0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw UsageError("epsilon must lie in [0, 1]");
    if (window < 1) throw UsageError("window T must be >= 1");
    if (!(eta > 0.0)) throw UsageError("eta must be > 0");
    optimizer.validate();
  }

  RefurbishConfig refurbish_config() const {
    if (mode == TrainMode::uniform_vote) return {window, eta, Evidence::hard, true};
    return {window, eta, evidence, false};
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double purity = std::numeric_limits<double>::quiet_NaN();  // NaN without ground truth
  double kappa = std::numeric_limits<double>::quiet_NaN();
  std::size_t psi_size = 0;
  bool lmm_active = false;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct FinalMetrics {
  double test_acc = 0.0;
  double test_auc = std::numeric_limits<double>::quiet_NaN();
  double val_acc = 0.0;
  double purity = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double initial_purity = std::numeric_limits<double>::quiet_NaN();
  double initial_kappa = std::numeric_limits<double>::quiet_NaN();
  std::size_t psi_size = 0;
  std::size_t skipped_steps = 0;  // batches with an empty effective set
};

struct TrainingReport {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  std::optional<int> trigger_epoch;
  FinalMetrics final;
  RefurbishedSet psi;
  ModelParams params;
  std::vector<std::vector<double>> param_trajectory;  // only with keep_param_trajectory
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Batch-level operations

struct SampleLoss {
  SampleId id;
  double loss;
};

/// The floor((1 - gamma) |B|) lowest-loss ids (at least one), lower id first
/// on equal loss. Returned in ascending id order.
inline std::vector<SampleId> select_clean(std::span<const SampleLoss> losses, double gamma) {
  if (losses.empty()) return {};
  std::vector<SampleLoss> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end(), [](const SampleLoss& a, const SampleLoss& b) {
    return a.loss < b.loss || (a.loss == b.loss && a.id < b.id);
  });
  const double keep_exact = (1.0 - gamma) * static_cast<double>(losses.size());
  std::size_t keep = static_cast<std::size_t>(std::floor(keep_exact + 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, losses.size());
  std::vector<SampleId> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(sorted[i].id);
  std::sort(out.begin(), out.end());
  return out;
}

struct BatchSample {
  SampleId id;
  std::span<const double> features;
  Label observed;
};

struct CompositeStep {
  std::size_t effective_count = 0;  // |(psi n B) u (C n B)|
  double loss = 0.0;                // mean loss over the effective set
  bool stepped = false;
};

/// One optimizer step on the mean loss of refurbished samples (with their
/// refurbished labels) and clean non-refurbished samples (with observed
/// labels). Refurbished membership wins over clean membership. With an
/// empty psi and C = B this is exactly the plain minibatch update.
inline CompositeStep composite_update(ModelParams& params, Optimizer& optimizer, std::span<const BatchSample> batch,
                                      std::span<const SampleId> clean, const RefurbishedSet& psi) {
  std::vector<LabeledInput> inputs;
  inputs.reserve(batch.size());
  for (const auto& s : batch) {
    if (const auto* e = psi.find(s.id))
      inputs.push_back({s.features, e->label});
    else if (std::binary_search(clean.begin(), clean.end(), s.id))
      inputs.push_back({s.features, s.observed});
  }
  CompositeStep out;
  out.effective_count = inputs.size();
  if (inputs.empty()) return out;
  auto lg = grad(params, inputs);
  if (!std::isfinite(lg.loss)) throw NumericError("non-finite training loss");
  optimizer.step(params, lg.grad);
  if (!params.all_finite()) throw NumericError("parameters became non-finite after an update");
  out.loss = lg.loss;
  out.stepped = true;
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<std::vector<double>> probs;
  std::vector<Label> predictions;
};

/// Mean cross-entropy and accuracy against the dataset's observed labels.
inline Evaluation evaluate(const ModelParams& params, const Dataset& data) {
  if (data.empty()) throw DataError("cannot evaluate on an empty dataset");
  Evaluation ev;
  ev.probs.reserve(data.size());
  ev.predictions.reserve(data.size());
  std::size_t correct = 0;
  for (const Sample& s : data.samples()) {
    auto p = forward(params, s.features);
    ev.loss += xent_loss(p, s.observed_label);
    const Label y = argmax(p);
    correct += y == s.observed_label;
    ev.predictions.push_back(y);
    ev.probs.push_back(std::move(p));
  }
  ev.loss /= static_cast<double>(data.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return ev;
}

// ---------------------------------------------------------------------------
// Training loop

/// Runs the full schedule: plain minibatch updates until the startup monitor
/// fires (never, in default mode), then clean selection, uncertainty gating,
/// refurbishment and composite updates. Every sample's prediction is recorded
/// each epoch from the first, so windows are full as soon as possible.
inline TrainingReport train(const TrainConfig& config_in, const Dataset& train_set, const Dataset& val_set,
                            const Dataset& test_set) {
  TrainConfig config = config_in;
  config.startup.noise_rate = config.gamma;
  config.validate();
  if (train_set.empty() || val_set.empty() || test_set.empty()) throw DataError("train/val/test sets must be nonempty");
  const std::size_t m = train_set.num_classes();
  if (val_set.num_classes() != m || test_set.num_classes() != m)
    throw DataError("train/val/test disagree on the number of classes");
  if (val_set.feature_dim() != train_set.feature_dim() || test_set.feature_dim() != train_set.feature_dim())
    throw DataError("train/val/test disagree on feature dimensionality");

  TrainingReport report;
  report.config = config;
  StartupMonitor monitor(config.startup, m);
  report.warnings = config.startup.validate(m);

  ModelParams params = init_params(config.architecture, train_set.feature_dim(), m, config.hidden, config.seed);
  Optimizer optimizer(config.optimizer);
  HistoryStore history(train_set.size(), config.window, train_set.label_space());
  RefurbishedSet& psi = report.psi;
  const RefurbishConfig rc = config.refurbish_config();
  const WeightVector weights = rc.weights();
  Rng shuffle_rng = Rng(config.seed).split(stream::shuffle);

  const bool has_truth = train_set.has_truth();
  std::vector<Label> truth;
  if (has_truth) {
    truth = train_set.truth_labels();
    const auto observed = train_set.observed_labels();
    report.final.initial_purity = data_purity(train_set, observed);
    report.final.initial_kappa = cohen_kappa(observed, truth);
  }

  std::vector<SampleId> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Evaluation val_eval = evaluate(params, val_set);

  std::vector<BatchSample> batch;
  std::vector<std::vector<double>> batch_probs;
  std::vector<SampleLoss> losses;
  std::vector<SampleId> all_ids;
  const RefurbishedSet no_refurbished;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const bool active = config.mode != TrainMode::standard && monitor.check(epoch, val_eval.loss, val_eval.accuracy);
    shuffle_rng.shuffle(std::span<SampleId>(order));
    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      batch_probs.clear();
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = train_set[order[k]];
        batch.push_back({s.id, s.features, s.observed_label});
        batch_probs.push_back(forward(params, s.features));
      }

      std::vector<SampleId> clean;
      if (!active) {
        all_ids.clear();
        for (const auto& s : batch) all_ids.push_back(s.id);
        std::sort(all_ids.begin(), all_ids.end());
        clean = all_ids;
      } else {
        losses.clear();
        for (std::size_t k = 0; k < batch.size(); ++k)
          losses.push_back({batch[k].id, xent_loss(batch_probs[k], batch[k].observed)});
        clean = select_clean(losses, config.gamma);
        for (std::size_t k = 0; k < batch.size(); ++k) {
          const SampleId id = batch[k].id;
          if (!is_refurbishable(history, id, config.epsilon, psi)) continue;
          refurbish(id, history.window(id), batch_probs[k], weights, rc.evidence, epoch, psi);
        }
      }

      // Windows hold epochs strictly before the current one while gating.
      for (std::size_t k = 0; k < batch.size(); ++k) history.record(batch[k].id, epoch, batch_probs[k]);

      const CompositeStep step = composite_update(params, optimizer, batch, clean, active ? psi : no_refurbished);
      if (!step.stepped) {
        ++report.final.skipped_steps;
        continue;
      }
      loss_sum += step.loss * static_cast<double>(step.effective_count);
      loss_count += step.effective_count;
    }

    val_eval = evaluate(params, val_set);
    const Evaluation test_eval = evaluate(params, test_set);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    rec.val_loss = val_eval.loss;
    rec.val_acc = val_eval.accuracy;
    rec.test_acc = test_eval.accuracy;
    if (has_truth) {
      const auto current = psi.current_labels(train_set);
      rec.purity = data_purity(train_set, current);
      rec.kappa = cohen_kappa(current, truth);
    }
    rec.psi_size = psi.size();
    rec.lmm_active = active;
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss))
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    report.epochs.push_back(rec);
    if (config.keep_param_trajectory)
      report.param_trajectory.emplace_back(params.values().begin(), params.values().end());
  }

  report.trigger_epoch = monitor.trigger_epoch();
  const Evaluation test_eval = evaluate(params, test_set);
  report.final.test_acc = test_eval.accuracy;
  try {
    report.final.test_auc = macro_auc(test_eval.probs, test_set.observed_labels(), m);
  } catch (const DataError&) {
    // single-class test set: AUC undefined, left as NaN
  }
  report.final.val_acc = val_eval.accuracy;
  report.final.psi_size = psi.size();
  if (has_truth) {
    const auto current = psi.current_labels(train_set);
    report.final.purity = data_purity(train_set, current);
    report.final.kappa = cohen_kappa(current, truth);
  }
  report.params = std::move(params);
  return report;
}

}  // namespace lmm
