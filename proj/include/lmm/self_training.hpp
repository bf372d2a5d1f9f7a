#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/error.hpp"
#include "lmm/metrics.hpp"
#include "lmm/rng.hpp"
#include "lmm/trainer.hpp"

namespace lmm {

/// Three-arm self-training comparison:
///   control            trains on the labeled slice only;
///   self_training      trains a fresh model on labeled + pseudo-labeled slices;
///   self_training_lmm  the same union with label management on.
/// Pseudo-labels are the control model's argmax predictions.
struct SelfTrainingResult {
  TrainingReport control;
  TrainingReport self_training;
  TrainingReport self_training_lmm;
  std::size_t labeled_count = 0;
  std::size_t pseudo_count = 0;
  double pseudo_label_purity = std::numeric_limits<double>::quiet_NaN();  // audit only
};

/// `pool` is the full training split. A random `labeled_fraction` of it keeps
/// its labels; an equally sized disjoint slice has its labels hidden and
/// replaced by pseudo-labels. With no samples left for the pseudo slice all
/// three arms equal the control run.
inline SelfTrainingResult self_train(const TrainConfig& config, const Dataset& pool, const Dataset& val,
                                     const Dataset& test, double labeled_fraction) {
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) throw UsageError("labeled_fraction must lie in (0, 1]");
  if (pool.empty()) throw DataError("self-training pool is empty");

  std::vector<SampleId> ids(pool.size());
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng = Rng(config.seed).split(stream::selftrain);
  rng.shuffle(std::span<SampleId>(ids));

  const std::size_t n_labeled = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(labeled_fraction * static_cast<double>(pool.size()))), 1, pool.size());
  const std::size_t n_pseudo = std::min(n_labeled, pool.size() - n_labeled);
  std::vector<SampleId> labeled_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_labeled));
  std::vector<SampleId> pseudo_ids(ids.begin() + static_cast<std::ptrdiff_t>(n_labeled),
                                   ids.begin() + static_cast<std::ptrdiff_t>(n_labeled + n_pseudo));
  std::sort(labeled_ids.begin(), labeled_ids.end());
  std::sort(pseudo_ids.begin(), pseudo_ids.end());

  SelfTrainingResult out;
  out.labeled_count = n_labeled;
  out.pseudo_count = n_pseudo;

  TrainConfig control_cfg = config;
  control_cfg.mode = TrainMode::standard;
  const Dataset labeled = pool.subset(labeled_ids);
  out.control = train(control_cfg, labeled, val, test);
  if (n_pseudo == 0) {
    out.self_training = out.control;
    out.self_training_lmm = out.control;
    return out;
  }

  // Union: labeled samples first, then pseudo-labeled ones. Every sample
  // carries its true label as audit-only ground truth.
  std::vector<Sample> samples;
  samples.reserve(n_labeled + n_pseudo);
  std::size_t pseudo_correct = 0;
  for (SampleId id : labeled_ids) {
    Sample s = pool[id];
    if (!s.truth_label) s.truth_label = s.observed_label;
    s.id = samples.size();
    samples.push_back(std::move(s));
  }
  for (SampleId id : pseudo_ids) {
    Sample s = pool[id];
    if (!s.truth_label) s.truth_label = s.observed_label;
    s.observed_label = argmax(forward(out.control.params, s.features));
    pseudo_correct += s.observed_label == *s.truth_label;
    s.id = samples.size();
    samples.push_back(std::move(s));
  }
  out.pseudo_label_purity = static_cast<double>(pseudo_correct) / static_cast<double>(n_pseudo);
  const Dataset combined(std::move(samples), pool.label_space(), pool.feature_dim());

  TrainConfig st_cfg = config;
  st_cfg.mode = TrainMode::standard;
  out.self_training = train(st_cfg, combined, val, test);
  TrainConfig lmm_cfg = config;
  lmm_cfg.mode = config.mode == TrainMode::standard ? TrainMode::lmm : config.mode;
  out.self_training_lmm = train(lmm_cfg, combined, val, test);
  return out;
}

}  // namespace lmm
