#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/error.hpp"
#include "lmm/format.hpp"
#include "lmm/metrics.hpp"
#include "lmm/noise.hpp"
#include "lmm/report.hpp"
#include "lmm/self_training.hpp"
#include "lmm/trainer.hpp"

namespace lmm {

/// Everything a train / sweep / selftrain run needs. Populated from a flat
/// `key = value` file and command-line overrides via apply_setting.
struct ExperimentConfig {
  // Data source: a CSV path, or a synthetic Gaussian mixture when empty.
  std::string data_csv;
  std::optional<std::size_t> num_classes;
  std::string synthetic = "two-class";  // two-class | polygon
  std::size_t n_per_class = 1450;
  double synth_sigma = 1.0;
  double synth_offset = 2.0;  // two-class means at (-offset, 0), (+offset, 0)
  std::size_t synth_classes = 5;
  double synth_radius = 4.0;

  // 10% of an 80% train portion is carved off for validation.
  double train_fraction = 0.72;
  double val_fraction = 0.08;
  double test_fraction = 0.20;

  // Symmetric noise injected into the train split; more than one rate runs a battery.
  std::vector<double> noise_rates{0.0};
  std::optional<double> gamma;  // assumed noise rate; defaults to the injected rate
  bool eval_on_truth = true;    // score val/test against truth labels when present

  TrainConfig train;
  std::vector<TrainMode> modes{TrainMode::lmm};
  std::vector<std::uint64_t> seeds{1};

  std::string output_dir = "lmm_out";
  std::string tag = "run";

  // sweep grids; an empty eta grid means train.eta only
  std::vector<std::size_t> windows{5, 10, 15};
  std::vector<double> epsilons{0.3, 0.325, 0.35, 0.375, 0.4, 0.425, 0.45};
  std::vector<double> etas;

  // selftrain
  std::vector<double> labeled_fractions{0.1, 0.15, 0.2, 0.25, 0.3};

  std::filesystem::path output_path() const {
    if (const char* env = std::getenv("LMM_OUTPUT_DIR"); env && *env) return env;
    return output_dir;
  }
};

// ---------------------------------------------------------------------------
// Settings

namespace detail {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  bool ok;
  if constexpr (std::is_floating_point_v<T>)
    ok = parse_double(trim(text), v);
  else
    ok = parse_int(trim(text), v);
  if (!ok) throw UsageError("setting '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  return v;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  for (auto item : split_fields(trim(text), ',')) {
    item = trim(item);
    if (item.empty()) continue;
    // a..b expands an integer range
    if constexpr (std::is_integral_v<T>) {
      if (auto dots = item.find(".."); dots != std::string_view::npos) {
        const T lo = parse_number<T>(key, item.substr(0, dots));
        const T hi = parse_number<T>(key, item.substr(dots + 2));
        if (hi < lo) throw UsageError("setting '" + std::string(key) + "': empty range");
        for (T v = lo; v <= hi; ++v) out.push_back(v);
        continue;
      }
    }
    out.push_back(parse_number<T>(key, item));
  }
  if (out.empty()) throw UsageError("setting '" + std::string(key) + "' needs at least one value");
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw UsageError("setting '" + std::string(key) + "': expected a boolean, got '" + std::string(text) + "'");
}

}  // namespace detail

struct SettingInfo {
  std::string key;
  std::string help;
};

/// Every recognized setting key, in documentation order.
inline const std::vector<SettingInfo>& setting_keys() {
  static const std::vector<SettingInfo> keys = {
      {"data", "input CSV (header f0..,label[,truth_label]); synthetic data when unset"},
      {"num-classes", "number of classes for CSV input (default: inferred)"},
      {"synthetic", "two-class | polygon"},
      {"n-per-class", "synthetic samples per class"},
      {"synth-sigma", "synthetic per-coordinate standard deviation"},
      {"synth-offset", "two-class mean offset along the first axis"},
      {"synth-classes", "polygon class count"},
      {"synth-radius", "polygon radius"},
      {"train-fraction", "train split fraction"},
      {"val-fraction", "validation split fraction"},
      {"test-fraction", "test split fraction"},
      {"noise-rates", "comma list of symmetric noise rates injected into train"},
      {"gamma", "assumed noise rate used by clean selection and start-up (default: injected rate)"},
      {"eval-on-truth", "score validation/test against truth labels when present"},
      {"epochs", "training epochs"},
      {"batch-size", "minibatch size"},
      {"window", "prediction window width T"},
      {"epsilon", "uncertainty threshold"},
      {"eta", "time-weight parameter"},
      {"evidence", "soft | hard likelihood evidence"},
      {"warmup", "warm-up epochs"},
      {"relaxation", "start-up relaxation factor in [-0.1, 0.1]"},
      {"loss-lower", "lower end of the start-up validation-loss band"},
      {"modes", "comma list of default, lmm, uniform-vote-ablation"},
      {"arch", "softmax-linear | mlp"},
      {"hidden", "mlp hidden units"},
      {"optimizer", "adam | sgd"},
      {"lr", "learning rate"},
      {"beta1", "adam beta1"},
      {"beta2", "adam beta2"},
      {"adam-eps", "adam epsilon"},
      {"seeds", "comma list of seeds; a..b ranges allowed"},
      {"output", "output directory (LMM_OUTPUT_DIR overrides)"},
      {"tag", "prefix for output file names"},
      {"windows", "sweep grid for T"},
      {"epsilons", "sweep grid for epsilon"},
      {"etas", "sweep grid for eta"},
      {"labeled-fractions", "selftrain labeled fractions"},
  };
  return keys;
}

/// Applies one `key = value` setting.
inline void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_bool;
  using detail::parse_list;
  using detail::parse_number;
  const std::string v(trim(value));
  auto& t = c.train;
  if (key == "data") c.data_csv = v;
  else if (key == "num-classes") c.num_classes = parse_number<std::size_t>(key, v);
  else if (key == "synthetic") {
    if (v != "two-class" && v != "polygon") throw UsageError("synthetic must be two-class or polygon");
    c.synthetic = v;
  }
  else if (key == "n-per-class") c.n_per_class = parse_number<std::size_t>(key, v);
  else if (key == "synth-sigma") c.synth_sigma = parse_number<double>(key, v);
  else if (key == "synth-offset") c.synth_offset = parse_number<double>(key, v);
  else if (key == "synth-classes") c.synth_classes = parse_number<std::size_t>(key, v);
  else if (key == "synth-radius") c.synth_radius = parse_number<double>(key, v);
  else if (key == "train-fraction") c.train_fraction = parse_number<double>(key, v);
  else if (key == "val-fraction") c.val_fraction = parse_number<double>(key, v);
  else if (key == "test-fraction") c.test_fraction = parse_number<double>(key, v);
  else if (key == "noise-rates") c.noise_rates = parse_list<double>(key, v);
  else if (key == "gamma") c.gamma = parse_number<double>(key, v);
  else if (key == "eval-on-truth") c.eval_on_truth = parse_bool(key, v);
  else if (key == "epochs") t.epochs = parse_number<int>(key, v);
  else if (key == "batch-size") t.batch_size = parse_number<std::size_t>(key, v);
  else if (key == "window") t.window = parse_number<std::size_t>(key, v);
  else if (key == "epsilon") t.epsilon = parse_number<double>(key, v);
  else if (key == "eta") t.eta = parse_number<double>(key, v);
  else if (key == "evidence") {
    if (v == "soft") t.evidence = Evidence::soft;
    else if (v == "hard") t.evidence = Evidence::hard;
    else throw UsageError("evidence must be soft or hard");
  }
  else if (key == "warmup") t.startup.warmup_epochs = parse_number<int>(key, v);
  else if (key == "relaxation") t.startup.relaxation = parse_number<double>(key, v);
  else if (key == "loss-lower") t.startup.loss_lower = parse_number<double>(key, v);
  else if (key == "modes") {
    c.modes.clear();
    for (auto m : split_fields(v, ',')) c.modes.push_back(parse_train_mode(trim(m)));
  }
  else if (key == "arch") {
    if (v == "softmax-linear") t.architecture = Architecture::softmax_linear;
    else if (v == "mlp") t.architecture = Architecture::mlp;
    else throw UsageError("arch must be softmax-linear or mlp");
  }
  else if (key == "hidden") t.hidden = parse_number<std::size_t>(key, v);
  else if (key == "optimizer") {
    if (v == "adam") t.optimizer.kind = OptimizerKind::adam;
    else if (v == "sgd") t.optimizer.kind = OptimizerKind::sgd;
    else throw UsageError("optimizer must be adam or sgd");
  }
  else if (key == "lr") t.optimizer.learning_rate = parse_number<double>(key, v);
  else if (key == "beta1") t.optimizer.beta1 = parse_number<double>(key, v);
  else if (key == "beta2") t.optimizer.beta2 = parse_number<double>(key, v);
  else if (key == "adam-eps") t.optimizer.epsilon = parse_number<double>(key, v);
  else if (key == "seeds") c.seeds = parse_list<std::uint64_t>(key, v);
  else if (key == "output") c.output_dir = v;
  else if (key == "tag") c.tag = v;
  else if (key == "windows") c.windows = parse_list<std::size_t>(key, v);
  else if (key == "epsilons") c.epsilons = parse_list<double>(key, v);
  else if (key == "etas") c.etas = parse_list<double>(key, v);
  else if (key == "labeled-fractions") c.labeled_fractions = parse_list<double>(key, v);
  else throw UsageError("unknown setting '" + std::string(key) + "'");
}

/// Parses `key = value` lines; `#` starts a comment. Keys may use `_` or `-`.
inline std::vector<std::pair<std::string, std::string>> parse_settings(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  for (std::size_t start = 0; start <= text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    for (char& ch : key)
      if (ch == '_') ch = '-';
    out.emplace_back(std::move(key), std::string(trim(line.substr(eq + 1))));
    if (end == text.size()) break;
  }
  return out;
}

inline void apply_settings_file(ExperimentConfig& c, const std::filesystem::path& path) {
  for (const auto& [k, v] : parse_settings(read_file(path))) apply_setting(c, k, v);
}

// ---------------------------------------------------------------------------
// Data preparation

struct PreparedData {
  Dataset train, val, test;
  std::vector<LabelFlip> flips;
};

/// Source dataset for one seed (the CSV ignores the seed).
inline Dataset source_dataset(const ExperimentConfig& c, std::uint64_t seed) {
  if (!c.data_csv.empty()) {
    CsvSchema schema;
    schema.num_classes = c.num_classes;
    return load_csv(c.data_csv, schema);
  }
  if (c.synthetic == "polygon")
    return synth_gaussians(GaussianMixtureSpec::polygon(c.synth_classes, c.synth_radius, c.synth_sigma), c.n_per_class, seed);
  return synth_gaussians(GaussianMixtureSpec::two_class(c.synth_offset, c.synth_sigma), c.n_per_class, seed);
}

/// Loads a CSV source once; synthetic sources are regenerated per seed.
class SourceCache {
 public:
  explicit SourceCache(const ExperimentConfig& c) : config_(c) {}
  const Dataset& get(std::uint64_t seed) {
    if (!config_.data_csv.empty()) {
      if (!cached_) cached_ = source_dataset(config_, seed);
      return *cached_;
    }
    if (!cached_ || seed_ != seed) {
      cached_ = source_dataset(config_, seed);
      seed_ = seed;
    }
    return *cached_;
  }

 private:
  const ExperimentConfig& config_;
  std::optional<Dataset> cached_;
  std::uint64_t seed_ = 0;
};

namespace detail {
inline Dataset relabel_with_truth(const Dataset& d) {
  if (!d.has_truth()) return d;
  const auto truth = d.truth_labels();
  return d.with_observed_labels(truth);
}
}  // namespace detail

/// Splits the source and injects symmetric noise into the train part only.
inline PreparedData prepare_data(const ExperimentConfig& c, const Dataset& source, std::uint64_t seed, double noise_rate) {
  SplitSpec spec{c.train_fraction, c.val_fraction, c.test_fraction, seed};
  auto parts = split(source, spec);
  PreparedData out;
  auto noisy = inject(parts.train, symmetric_matrix(source.num_classes(), noise_rate), seed);
  out.train = std::move(noisy.data);
  out.flips = std::move(noisy.flips);
  out.val = c.eval_on_truth ? detail::relabel_with_truth(parts.val) : std::move(parts.val);
  out.test = c.eval_on_truth ? detail::relabel_with_truth(parts.test) : std::move(parts.test);
  return out;
}

inline TrainConfig train_config_for(const ExperimentConfig& c, TrainMode mode, std::uint64_t seed, double noise_rate) {
  TrainConfig t = c.train;
  t.mode = mode;
  t.seed = seed;
  t.gamma = c.gamma.value_or(noise_rate);
  return t;
}

/// Run name: <tag>_g<rate>_<mode>_s<seed>
inline std::string run_stem(const std::string& tag, double noise_rate, TrainMode mode, std::uint64_t seed) {
  return tag + "_g" + format_double(noise_rate) + "_" + to_string(mode) + "_s" + std::to_string(seed);
}

// ---------------------------------------------------------------------------
// train

struct RunOutcome {
  double noise_rate = 0.0;
  TrainMode mode = TrainMode::standard;
  std::uint64_t seed = 0;
  std::optional<TrainingReport> report;  // empty when the run failed numerically
  std::string error;
};

struct AggregateRow {
  double noise_rate = 0.0;
  TrainMode mode = TrainMode::standard;
  std::size_t ok = 0, failed = 0;
  MeanStd test_acc, test_auc, purity, kappa, initial_purity, psi_size;
};

inline std::vector<AggregateRow> aggregate(const std::vector<RunOutcome>& runs) {
  std::vector<AggregateRow> rows;
  std::map<std::pair<double, int>, std::vector<const RunOutcome*>> groups;
  std::vector<std::pair<double, int>> order;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.noise_rate, static_cast<int>(r.mode));
    if (!groups.contains(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    AggregateRow row;
    row.noise_rate = key.first;
    row.mode = static_cast<TrainMode>(key.second);
    std::vector<double> acc, auc_v, pur, kap, ipur, psi;
    for (const RunOutcome* r : groups[key]) {
      if (!r->report) {
        ++row.failed;
        continue;
      }
      ++row.ok;
      const auto& f = r->report->final;
      acc.push_back(f.test_acc);
      auc_v.push_back(f.test_auc);
      pur.push_back(f.purity);
      kap.push_back(f.kappa);
      ipur.push_back(f.initial_purity);
      psi.push_back(static_cast<double>(f.psi_size));
    }
    row.test_acc = mean_std(acc);
    row.test_auc = mean_std(auc_v);
    row.purity = mean_std(pur);
    row.kappa = mean_std(kap);
    row.initial_purity = mean_std(ipur);
    row.psi_size = mean_std(psi);
    rows.push_back(row);
  }
  return rows;
}

/// One row per (noise rate, mode); the `lmm` column flags label-managed runs.
inline std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out =
      "noise_rate,mode,lmm,runs,failed,test_acc_mean,test_acc_std,test_auc_mean,test_auc_std,purity_mean,purity_std,"
      "kappa_mean,kappa_std,initial_purity_mean,psi_size_mean\n";
  for (const auto& r : rows) {
    out += format_double(r.noise_rate) + "," + to_string(r.mode) + "," + (r.mode == TrainMode::standard ? "0" : "1") +
           "," + std::to_string(r.ok) + "," + std::to_string(r.failed) + "," + format_metric(r.test_acc.mean) + "," +
           format_metric(r.test_acc.std) + "," + format_metric(r.test_auc.mean) + "," + format_metric(r.test_auc.std) +
           "," + format_metric(r.purity.mean) + "," + format_metric(r.purity.std) + "," + format_metric(r.kappa.mean) +
           "," + format_metric(r.kappa.std) + "," + format_metric(r.initial_purity.mean) + "," +
           format_metric(r.psi_size.mean) + "\n";
  }
  return out;
}

struct TrainBattery {
  std::vector<RunOutcome> runs;
  std::vector<AggregateRow> rows;
};

/// Every (noise rate, mode, seed) combination. Numeric failures are recorded
/// per run and do not stop the battery.
inline TrainBattery run_train(const ExperimentConfig& c, bool write_files = true) {
  if (c.seeds.empty()) throw UsageError("seed list is empty");
  if (c.modes.empty()) throw UsageError("mode list is empty");
  const auto dir = c.output_path();
  TrainBattery out;
  SourceCache sources(c);
  for (double rate : c.noise_rates) {
    for (std::uint64_t seed : c.seeds) {
      const PreparedData data = prepare_data(c, sources.get(seed), seed, rate);
      if (write_files)
        write_file_atomic(dir / (c.tag + "_g" + format_double(rate) + "_s" + std::to_string(seed) + "_flips.csv"),
                          flip_log_csv(data.flips));
      for (TrainMode mode : c.modes) {
        RunOutcome run{rate, mode, seed, std::nullopt, {}};
        try {
          run.report = train(train_config_for(c, mode, seed, rate), data.train, data.val, data.test);
          if (write_files) write_report(*run.report, dir, run_stem(c.tag, rate, mode, seed));
        } catch (const NumericError& e) {
          run.error = e.what();
          if (write_files)
            write_file_atomic(dir / (run_stem(c.tag, rate, mode, seed) + "_summary.txt"),
                              "status = failed\nerror = " + run.error + "\n");
        }
        out.runs.push_back(std::move(run));
      }
    }
  }
  out.rows = aggregate(out.runs);
  if (write_files) write_file_atomic(dir / (c.tag + "_aggregate.csv"), aggregate_csv(out.rows));
  return out;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepRow {
  std::size_t window = 0;
  double epsilon = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::optional<FinalMetrics> metrics;
  std::optional<int> trigger_epoch;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t best_window = 0;
  double best_epsilon = 0.0;
  double best_eta = 0.0;
  double best_mean_test_acc = 0.0;
  std::size_t cells = 0;
};

inline std::string sweep_csv(const SweepResult& s) {
  std::string out = "window,epsilon,eta,seed,status,test_acc,test_auc,purity,kappa,trigger_epoch,psi_size\n";
  for (const auto& r : s.rows) {
    out += std::to_string(r.window) + "," + format_double(r.epsilon) + "," + format_double(r.eta) + "," +
           std::to_string(r.seed) + ",";
    if (!r.metrics) {
      out += "failed,nan,nan,nan,nan,none,0\n";
      continue;
    }
    const auto& m = *r.metrics;
    out += "ok," + format_metric(m.test_acc) + "," + format_metric(m.test_auc) + "," + format_metric(m.purity) + "," +
           format_metric(m.kappa) + "," + (r.trigger_epoch ? std::to_string(*r.trigger_epoch) : "none") + "," +
           std::to_string(m.psi_size) + "\n";
  }
  return out;
}

/// Grid over (T, epsilon, eta) with label management on, first noise rate of
/// the config. The best cell maximizes mean test accuracy; earlier cells win ties.
inline SweepResult run_sweep(const ExperimentConfig& c, bool write_files = true) {
  if (c.windows.empty() || c.epsilons.empty()) throw UsageError("sweep grids must be nonempty");
  if (c.seeds.empty()) throw UsageError("seed list is empty");
  const std::vector<double> etas = c.etas.empty() ? std::vector<double>{c.train.eta} : c.etas;
  const double rate = c.noise_rates.front();
  TrainMode mode = TrainMode::lmm;
  for (TrainMode m : c.modes)
    if (m != TrainMode::standard) {
      mode = m;
      break;
    }

  std::vector<PreparedData> data;
  SourceCache sources(c);
  for (std::uint64_t seed : c.seeds) data.push_back(prepare_data(c, sources.get(seed), seed, rate));

  SweepResult out;
  bool have_best = false;
  for (std::size_t window : c.windows)
    for (double eps : c.epsilons)
      for (double eta : etas) {
        ++out.cells;
        double sum = 0.0;
        std::size_t ok = 0;
        for (std::size_t k = 0; k < c.seeds.size(); ++k) {
          SweepRow row{window, eps, eta, c.seeds[k], std::nullopt, std::nullopt, {}};
          try {
            TrainConfig t = train_config_for(c, mode, c.seeds[k], rate);
            t.window = window;
            t.epsilon = eps;
            t.eta = eta;
            const auto r = train(t, data[k].train, data[k].val, data[k].test);
            row.metrics = r.final;
            row.trigger_epoch = r.trigger_epoch;
            sum += r.final.test_acc;
            ++ok;
          } catch (const Error& e) {
            row.error = e.what();
          }
          out.rows.push_back(std::move(row));
        }
        if (ok == 0) continue;
        const double mean = sum / static_cast<double>(ok);
        if (!have_best || mean > out.best_mean_test_acc) {
          have_best = true;
          out.best_window = window;
          out.best_epsilon = eps;
          out.best_eta = eta;
          out.best_mean_test_acc = mean;
        }
      }

  if (write_files) {
    const auto dir = c.output_path();
    write_file_atomic(dir / (c.tag + "_sweep.csv"), sweep_csv(out));
    std::string best = "cells = " + std::to_string(out.cells) + "\n";
    if (have_best)
      best += "best_window = " + std::to_string(out.best_window) + "\nbest_epsilon = " + format_double(out.best_epsilon) +
              "\nbest_eta = " + format_double(out.best_eta) +
              "\nbest_mean_test_acc = " + format_double(out.best_mean_test_acc) + "\n";
    else
      best += "best = none\n";
    write_file_atomic(dir / (c.tag + "_sweep_best.txt"), best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// selftrain

struct SelfTrainRow {
  double labeled_fraction = 0.0;
  std::uint64_t seed = 0;
  SelfTrainingResult result;
};

struct SelfTrainBattery {
  std::vector<SelfTrainRow> rows;
};

inline std::string selftrain_csv(const SelfTrainBattery& b) {
  std::string out =
      "labeled_fraction,seed,labeled,pseudo,pseudo_label_purity,control_acc,self_training_acc,self_training_lmm_acc,"
      "lmm_purity,lmm_trigger_epoch\n";
  for (const auto& r : b.rows) {
    const auto& s = r.result;
    out += format_double(r.labeled_fraction) + "," + std::to_string(r.seed) + "," + std::to_string(s.labeled_count) +
           "," + std::to_string(s.pseudo_count) + "," + format_metric(s.pseudo_label_purity) + "," +
           format_metric(s.control.final.test_acc) + "," + format_metric(s.self_training.final.test_acc) + "," +
           format_metric(s.self_training_lmm.final.test_acc) + "," + format_metric(s.self_training_lmm.final.purity) +
           "," + (s.self_training_lmm.trigger_epoch ? std::to_string(*s.self_training_lmm.trigger_epoch) : "none") +
           "\n";
  }
  return out;
}

inline std::string selftrain_aggregate_csv(const SelfTrainBattery& b) {
  std::string out =
      "labeled_fraction,seeds,control_mean,control_std,self_training_mean,self_training_std,self_training_lmm_mean,"
      "self_training_lmm_std\n";
  std::vector<double> fractions;
  for (const auto& r : b.rows)
    if (std::find(fractions.begin(), fractions.end(), r.labeled_fraction) == fractions.end())
      fractions.push_back(r.labeled_fraction);
  for (double f : fractions) {
    std::vector<double> a, s, l;
    for (const auto& r : b.rows)
      if (r.labeled_fraction == f) {
        a.push_back(r.result.control.final.test_acc);
        s.push_back(r.result.self_training.final.test_acc);
        l.push_back(r.result.self_training_lmm.final.test_acc);
      }
    const auto ma = mean_std(a), ms = mean_std(s), ml = mean_std(l);
    out += format_double(f) + "," + std::to_string(ma.n) + "," + format_metric(ma.mean) + "," + format_metric(ma.std) +
           "," + format_metric(ms.mean) + "," + format_metric(ms.std) + "," + format_metric(ml.mean) + "," +
           format_metric(ml.std) + "\n";
  }
  return out;
}

/// Self-training battery over labeled fractions and seeds on the clean train
/// split. The assumed pseudo-label noise rate is `gamma` (default 0.1).
inline SelfTrainBattery run_selftrain(const ExperimentConfig& c, bool write_files = true) {
  if (c.seeds.empty()) throw UsageError("seed list is empty");
  SelfTrainBattery out;
  SourceCache sources(c);
  for (double fraction : c.labeled_fractions) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("labeled fractions must lie in (0, 1)");
    for (std::uint64_t seed : c.seeds) {
      const PreparedData data = prepare_data(c, sources.get(seed), seed, 0.0);
      TrainConfig t = c.train;
      t.seed = seed;
      t.gamma = c.gamma.value_or(0.1);
      t.mode = TrainMode::lmm;
      for (TrainMode m : c.modes)
        if (m != TrainMode::standard) {
          t.mode = m;
          break;
        }
      out.rows.push_back({fraction, seed, self_train(t, data.train, data.val, data.test, fraction)});
    }
  }
  if (write_files) {
    const auto dir = c.output_path();
    write_file_atomic(dir / (c.tag + "_selftrain.csv"), selftrain_csv(out));
    write_file_atomic(dir / (c.tag + "_selftrain_aggregate.csv"), selftrain_aggregate_csv(out));
  }
  return out;
}

}  // namespace lmm
