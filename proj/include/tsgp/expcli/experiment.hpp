#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tsgp/expcli/config.hpp"
#include "tsgp/expcli/metrics.hpp"

namespace tsgp {

struct MethodOutcome {
  Method method = Method::kSgpr;
  TrainConfig config;
  bool failed = false;  // threw, or training stopped on a numerical failure
  std::string error;
  std::optional<FitResult> fit;
  std::optional<Metrics> train_metrics;
  std::optional<Metrics> validation_metrics;
  std::optional<Metrics> test_metrics;
};

struct RepeatOutcome {
  int repeat = 0;
  std::uint64_t seed = 0;
  Eigen::Index n_train = 0;
  Eigen::Index n_validation = 0;
  Eigen::Index n_test = 0;
  std::string error;  // set when the repeat failed before any method ran
  std::vector<MethodOutcome> methods;
};

struct ExperimentResult {
  std::vector<RepeatOutcome> repeats;
  std::vector<std::string> files;  // every file written, in a fixed order
  bool any_failed = false;
};

/// Trains every configured method on `cfg.repeats` seeded splits and writes,
/// under cfg.output_dir:
///   repeat_<r>.json          per-repeat results (no wall-clock values)
///   summary.csv              mean and standard error per method
///   plots/trace_r<r>_<method>.csv, plots/vhist_r<r>_<method>.csv and, for
///   1-D inputs, plots/predict_r<r>_<method>.csv and plots/train_r<r>.csv
/// Progress and timings go to `log` when non-null.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// One repeat, without writing anything.
RepeatOutcome run_repeat(const ExperimentConfig& cfg, const Dataset& data, int repeat,
                         std::ostream* log = nullptr);

Json repeat_json(const ExperimentConfig& cfg, const RepeatOutcome& r);
Json metrics_json(const Metrics& m);

/// Aggregate table over the non-failed repeats of each method.
void write_summary_csv(const std::string& path, const ExperimentConfig& cfg,
                       const std::vector<RepeatOutcome>& repeats);

}  // namespace tsgp
