#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsgp/data.hpp"
#include "tsgp/trainer/fit.hpp"

namespace tsgp {

using Json = nlohmann::ordered_json;

// Where the data comes from: a CSV file (`path`) or a built-in generator.
struct DatasetSource {
  std::string generator;  // snelson_like, snelson_table, poisson_toy, synthetic; empty for CSV
  std::string path;
  CsvOptions csv;
  int n = 40;             // snelson_like, synthetic
  int dim = 1;            // synthetic
  double noise_sd = 0.3;  // synthetic
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  DatasetSource data;
  double test_fraction = 0.2;
  double validation_fraction = 0.2;  // of the points left after the test split
  int repeats = 1;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::kSgpr, Method::kSgprNew};
  TrainConfig train;                       // shared settings
  std::map<Method, Json> method_overrides;  // partial "train" objects per method
  std::string output_dir = "out";
  int jobs = 1;                            // repeats run concurrently when > 1
  std::vector<int> compare_m;              // inducing sizes for compare-bounds
  int plot_grid = 200;                     // points in 1-D prediction plots

  void validate() const;

  /// Training settings for `m` in repeat `repeat`: the shared block, the
  /// method's overrides, and a seed derived from the experiment seed (shared
  /// by all methods so they start from the same inducing inputs).
  TrainConfig train_config(Method m, int repeat) const;
};

/// Parses and validates a config object. Unknown keys, wrong types and
/// out-of-range values raise ConfigError naming the offending field.
ExperimentConfig parse_experiment_config(const Json& j);
ExperimentConfig load_experiment_config(const std::string& path);

/// Applies the keys of a "train" object to `cfg`.
void apply_train_json(TrainConfig& cfg, const Json& j);

Json to_json(const TrainConfig& cfg);
Json to_json(const ExperimentConfig& cfg);

/// Materializes the configured dataset (normalized).
Dataset load_dataset(const DatasetSource& src);

/// Trained model with everything `predict` needs: layout, unconstrained
/// parameters, normalized training data and the normalization.
Json model_to_json(const FitResult& r);
FitResult model_from_json(const Json& j);

/// Constrained hyperparameters and variational quantities of a fit.
Json hyperparameters_json(const FitResult& r);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

}  // namespace tsgp
