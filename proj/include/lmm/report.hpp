#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "lmm/format.hpp"
#include "lmm/noise.hpp"
#include "lmm/trainer.hpp"

namespace lmm {

inline std::string format_metric(double v) { return std::isnan(v) ? std::string("nan") : format_double(v); }

/// epoch,train_loss,val_loss,val_acc,test_acc,purity,kappa,psi_size,lmm_active
inline std::string epochs_csv(const TrainingReport& r) {
  std::string out = "epoch,train_loss,val_loss,val_acc,test_acc,purity,kappa,psi_size,lmm_active\n";
  for (const auto& e : r.epochs) {
    out += std::to_string(e.epoch) + "," + format_metric(e.train_loss) + "," + format_metric(e.val_loss) + "," +
           format_metric(e.val_acc) + "," + format_metric(e.test_acc) + "," + format_metric(e.purity) + "," +
           format_metric(e.kappa) + "," + std::to_string(e.psi_size) + "," + (e.lmm_active ? "1" : "0") + "\n";
  }
  return out;
}

/// key = value lines.
inline std::string summary_text(const TrainingReport& r) {
  const auto& c = r.config;
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  kv("mode", to_string(c.mode));
  kv("seed", std::to_string(c.seed));
  kv("epochs", std::to_string(r.epochs.size()));
  kv("gamma", format_double(c.gamma));
  kv("window", std::to_string(c.window));
  kv("epsilon", format_double(c.epsilon));
  kv("eta", format_double(c.eta));
  kv("evidence", c.evidence == Evidence::soft ? "soft" : "hard");
  kv("warmup", std::to_string(c.startup.warmup_epochs));
  kv("relaxation", format_double(c.startup.relaxation));
  kv("trigger_epoch", r.trigger_epoch ? std::to_string(*r.trigger_epoch) : "none");
  kv("test_acc", format_metric(r.final.test_acc));
  kv("test_auc", format_metric(r.final.test_auc));
  kv("val_acc", format_metric(r.final.val_acc));
  kv("purity", format_metric(r.final.purity));
  kv("kappa", format_metric(r.final.kappa));
  kv("initial_purity", format_metric(r.final.initial_purity));
  kv("initial_kappa", format_metric(r.final.initial_kappa));
  kv("psi_size", std::to_string(r.final.psi_size));
  kv("skipped_steps", std::to_string(r.final.skipped_steps));
  for (const auto& w : r.warnings) kv("warning", w);
  return out;
}

/// Writes <stem>_epochs.csv, <stem>_summary.txt and <stem>_psi.csv.
inline void write_report(const TrainingReport& r, const std::filesystem::path& dir, const std::string& stem) {
  write_file_atomic(dir / (stem + "_epochs.csv"), epochs_csv(r));
  write_file_atomic(dir / (stem + "_summary.txt"), summary_text(r));
  write_file_atomic(dir / (stem + "_psi.csv"), r.psi.to_csv(r.params.num_classes()));
}

struct MeanStd {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

/// Mean and sample standard deviation (n - 1), ignoring NaN entries.
inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  double sum = 0.0;
  for (double x : xs)
    if (!std::isnan(x)) {
      sum += x;
      ++out.n;
    }
  if (out.n == 0) return out;
  out.mean = sum / static_cast<double>(out.n);
  double ss = 0.0;
  for (double x : xs)
    if (!std::isnan(x)) ss += (x - out.mean) * (x - out.mean);
  out.std = out.n > 1 ? std::sqrt(ss / static_cast<double>(out.n - 1)) : 0.0;
  return out;
}

}  // namespace lmm

namespace lmm {

/// Reads the refurbished-set CSV written by RefurbishedSet::to_csv.
inline RefurbishedSet parse_psi_csv(std::string_view text) {
  RefurbishedSet psi;
  std::size_t line_no = 0;
  for (std::size_t start = 0; start < text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (++line_no == 1 || line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() < 4) throw DataError("psi CSV line " + std::to_string(line_no) + ": too few fields");
    std::size_t id = 0, label = 0;
    int epoch = 0;
    if (!parse_int(f[0], id) || !parse_int(f[1], label) || !parse_int(f[2], epoch))
      throw DataError("psi CSV line " + std::to_string(line_no) + ": bad integer field");
    RefurbishedEntry e{label, {}, epoch};
    for (std::size_t k = 3; k < f.size(); ++k) {
      double p = 0.0;
      if (!parse_double(f[k], p)) throw DataError("psi CSV line " + std::to_string(line_no) + ": bad probability");
      e.posterior.push_back(p);
    }
    psi.assign(id, std::move(e));
  }
  return psi;
}

}  // namespace lmm
