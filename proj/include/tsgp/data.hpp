#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsgp/types.hpp"

namespace tsgp {

struct Normalization {
  VectorXd x_means;
  double y_mean = 0.0;
};

/// Inputs and targets after centering, the shift that was removed, and the
/// original values kept verbatim so files round-trip exactly. One point per row.
struct Dataset {
  MatrixXd x;
  VectorXd y;
  MatrixXd x_raw;
  VectorXd y_raw;
  Normalization norm;
  std::string name;
  bool counts = false;  // targets are non-negative integers; y is never centered

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }

  /// Normalized-scale predictions back to the original target scale.
  VectorXd denormalize(const VectorXd& pred) const { return pred.array() + norm.y_mean; }
};

/// Centers x columns (and y unless `counts`), recording the means.
Dataset normalize(MatrixXd x, VectorXd y, std::string name, bool counts = false);

/// Rows `idx` of `d`, normalized afresh from their raw values.
Dataset subset(const Dataset& d, std::span<const Eigen::Index> idx);

/// Rows `idx` of `d` centered with a given normalization (for held-out sets,
/// which must share the training shift).
Dataset subset(const Dataset& d, std::span<const Eigen::Index> idx, const Normalization& norm);

struct CsvOptions {
  bool header = true;
  std::string target = "";  // column name; empty means the last column
  int target_index = -1;    // used when >= 0, overrides `target`
  bool counts = false;
};

/// Reads a numeric CSV. Rows containing NaN or Inf are dropped and counted in
/// `rejected` (a warning goes to stderr). Throws IoError, ParseError or
/// EmptyDataset.
Dataset load_csv(const std::string& path, const CsvOptions& opt = {}, int* rejected = nullptr);

/// Reads an all-numeric CSV into a matrix (prediction inputs). NaN/Inf rows
/// are dropped with a warning.
MatrixXd load_matrix_csv(const std::string& path, bool header = true);

/// Writes raw x columns and y as the last column with 17 significant digits,
/// under a header x0,...,x{d-1},y.
void write_csv(const std::string& path, const Dataset& d);

/// 1-D regression data shaped like the classic Snelson benchmark: the bundled
/// 200-point table subsampled to `n` rows by seeded uniform choice
/// (n >= 200 returns every row).
Dataset make_snelson_like(int n, std::uint64_t seed);

/// 200-point bundled table itself, before subsampling.
Dataset snelson_like_table();

/// 50 equispaced inputs on [-10, 10] with counts ~ Poisson(3.5 + 3 sin x).
Dataset make_poisson_toy(std::uint64_t seed);

/// y = sin(3 x1) + 0.5 cos(x2) + ... with Gaussian noise; d-dimensional inputs
/// uniform on [-2, 2].
Dataset make_synthetic_regression(int n, int dim, double noise_sd, std::uint64_t seed);

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> validation;
  std::vector<Eigen::Index> test;
};

/// Seeded random partition: `test_fraction` of the points go to test and
/// `validation_fraction` of the remaining training points to validation.
Split split_indices(Eigen::Index n, double test_fraction, double validation_fraction,
                    std::uint64_t seed);

}  // namespace tsgp
