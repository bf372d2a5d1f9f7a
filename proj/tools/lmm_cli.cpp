// Command-line front end: inject, train, sweep, selftrain, eval.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "lmm/dataset.hpp"
#include "lmm/experiment.hpp"
#include "lmm/metrics.hpp"
#include "lmm/noise.hpp"
#include "lmm/report.hpp"

namespace {

struct ExperimentArgs {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

// Registers --config plus one --<key> option per setting.
void add_experiment_options(CLI::App* cmd, ExperimentArgs& args) {
  cmd->add_option("--config", args.config_file, "flat key = value settings file")->check(CLI::ExistingFile);
  for (const auto& info : lmm::setting_keys()) cmd->add_option("--" + info.key, args.overrides[info.key], info.help);
}

lmm::ExperimentConfig build_config(const CLI::App* cmd, const ExperimentArgs& args) {
  lmm::ExperimentConfig config;
  if (!args.config_file.empty()) lmm::apply_settings_file(config, args.config_file);
  for (const auto& info : lmm::setting_keys())
    if (cmd->count("--" + info.key) > 0) lmm::apply_setting(config, info.key, args.overrides.at(info.key));
  return config;
}

void print_aggregate(const std::vector<lmm::AggregateRow>& rows) {
  std::printf("%-10s %-22s %5s %7s %14s %14s %14s %14s\n", "noise", "mode", "runs", "failed", "test_acc", "test_auc",
              "purity", "kappa");
  for (const auto& r : rows)
    std::printf("%-10.3f %-22s %5zu %7zu %7.4f+-%.4f %7.4f+-%.4f %7.4f+-%.4f %7.4f+-%.4f\n", r.noise_rate,
                lmm::to_string(r.mode).c_str(), r.ok, r.failed, r.test_acc.mean, r.test_acc.std, r.test_auc.mean,
                r.test_auc.std, r.purity.mean, r.purity.std, r.kappa.mean, r.kappa.std);
}

int run_inject(const std::string& input, const std::string& output, const std::string& flips_path, double rate,
               std::uint64_t seed, int num_classes) {
  lmm::CsvSchema schema;
  if (num_classes > 0) schema.num_classes = static_cast<std::size_t>(num_classes);
  const auto data = lmm::load_csv(input, schema);
  const auto noisy = lmm::inject(data, lmm::symmetric_matrix(data.num_classes(), rate), seed);
  lmm::save_csv(noisy.data, output);
  if (!flips_path.empty()) lmm::write_file_atomic(flips_path, lmm::flip_log_csv(noisy.flips));
  std::printf("samples = %zu\nflipped = %zu\nflip_fraction = %.6f\n", data.size(), noisy.flips.size(),
              static_cast<double>(noisy.flips.size()) / static_cast<double>(data.size()));
  return 0;
}

int run_eval(const std::string& input, const std::string& psi_path, int num_classes) {
  lmm::CsvSchema schema;
  if (num_classes > 0) schema.num_classes = static_cast<std::size_t>(num_classes);
  const auto data = lmm::load_csv(input, schema);
  if (!data.has_truth()) throw lmm::DataError("eval needs a truth_label column for every row");
  auto labels = data.observed_labels();
  if (!psi_path.empty()) {
    const auto psi = lmm::parse_psi_csv(lmm::read_file(psi_path));
    for (const auto& [id, e] : psi) {
      if (id >= labels.size() || e.label >= data.num_classes()) throw lmm::DataError("psi entry out of range");
      labels[id] = e.label;
    }
  }
  const auto truth = data.truth_labels();
  const auto cm = lmm::confusion(truth, labels, data.num_classes());
  std::printf("samples = %zu\npurity = %.6f\nkappa = %.6f\n", data.size(), lmm::data_purity(data, labels),
              lmm::cohen_kappa(labels, truth));
  std::printf("confusion (rows: truth, cols: label)\n%s", cm.to_table().c_str());
  std::printf("row-normalized\n%s", cm.to_table(true).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label management for training classifiers on noisily labeled data"};
  app.require_subcommand(1);

  std::string inject_in, inject_out, inject_flips;
  double inject_rate = 0.0;
  std::uint64_t inject_seed = 0;
  int inject_classes = 0;
  auto* inject = app.add_subcommand("inject", "inject symmetric label noise into a CSV dataset");
  inject->add_option("--input", inject_in, "input CSV")->required();
  inject->add_option("--output", inject_out, "noisy output CSV (truth_label filled)")->required();
  inject->add_option("--flips", inject_flips, "flip log CSV (id,old_label,new_label)");
  inject->add_option("--noise-rate", inject_rate, "symmetric noise rate in [0, 1]")->required();
  inject->add_option("--seed", inject_seed, "noise seed");
  inject->add_option("--num-classes", inject_classes, "number of classes (default: inferred)");

  ExperimentArgs train_args, sweep_args, self_args;
  auto* train = app.add_subcommand("train", "train with and without label management over seeds and noise rates");
  add_experiment_options(train, train_args);
  auto* sweep = app.add_subcommand("sweep", "grid search over window width, threshold and eta");
  add_experiment_options(sweep, sweep_args);
  auto* selftrain = app.add_subcommand("selftrain", "self-training with refurbished pseudo-labels");
  add_experiment_options(selftrain, self_args);

  std::string eval_in, eval_psi;
  int eval_classes = 0;
  auto* eval = app.add_subcommand("eval", "purity, kappa and confusion of a labeled CSV against its truth labels");
  eval->add_option("--input", eval_in, "CSV with label and truth_label columns")->required();
  eval->add_option("--psi", eval_psi, "refurbished-set CSV whose labels replace the observed ones");
  eval->add_option("--num-classes", eval_classes, "number of classes (default: inferred)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (inject->parsed()) return run_inject(inject_in, inject_out, inject_flips, inject_rate, inject_seed, inject_classes);
    if (eval->parsed()) return run_eval(eval_in, eval_psi, eval_classes);
    if (train->parsed()) {
      const auto config = build_config(train, train_args);
      const auto battery = lmm::run_train(config);
      print_aggregate(battery.rows);
      for (const auto& r : battery.runs)
        if (!r.report) std::fprintf(stderr, "seed %llu (%s): %s\n", static_cast<unsigned long long>(r.seed),
                                    lmm::to_string(r.mode).c_str(), r.error.c_str());
      std::printf("outputs in %s\n", config.output_path().string().c_str());
      return 0;
    }
    if (sweep->parsed()) {
      const auto config = build_config(sweep, sweep_args);
      const auto result = lmm::run_sweep(config);
      std::printf("cells = %zu\nbest: window = %zu, epsilon = %g, eta = %g, mean test_acc = %.4f\n", result.cells,
                  result.best_window, result.best_epsilon, result.best_eta, result.best_mean_test_acc);
      std::printf("outputs in %s\n", config.output_path().string().c_str());
      return 0;
    }
    if (selftrain->parsed()) {
      const auto config = build_config(selftrain, self_args);
      const auto battery = lmm::run_selftrain(config);
      std::printf("%s", lmm::selftrain_aggregate_csv(battery).c_str());
      std::printf("outputs in %s\n", config.output_path().string().c_str());
      return 0;
    }
  } catch (const lmm::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
