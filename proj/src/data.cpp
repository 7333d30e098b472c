#include "tsgp/data.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "tsgp/error.hpp"
#include "tsgp/linalg.hpp"
#include "tsgp/random.hpp"

namespace tsgp {

namespace {

Dataset centered(MatrixXd x, VectorXd y, const Normalization& norm, std::string name, bool counts) {
  Dataset d;
  d.norm = norm;
  d.x = x.rowwise() - norm.x_means.transpose();
  d.y = y.array() - norm.y_mean;
  d.x_raw = std::move(x);
  d.y_raw = std::move(y);
  d.name = std::move(name);
  d.counts = counts;
  return d;
}

void take_rows(const Dataset& d, std::span<const Eigen::Index> idx, MatrixXd& x, VectorXd& y) {
  x.resize(static_cast<Eigen::Index>(idx.size()), d.dim());
  y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Eigen::Index i = idx[k];
    if (i < 0 || i >= d.size()) throw IndexOutOfRange("row " + std::to_string(i) + " out of range");
    x.row(static_cast<Eigen::Index>(k)) = d.x_raw.row(i);
    y[static_cast<Eigen::Index>(k)] = d.y_raw[i];
  }
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, const std::string& path, std::size_t line) {
  if (s.empty()) throw ParseError(path + ":" + std::to_string(line) + ": empty cell");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    throw ParseError(path + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

// A smooth 1-D function plus noise at the scale of the classic Snelson data:
// 200 inputs on roughly [0, 6], targets a GP draw with unit-order amplitude.
constexpr std::uint64_t kSnelsonTableSeed = 0;
constexpr int kSnelsonTableSize = 200;

}  // namespace

Dataset normalize(MatrixXd x, VectorXd y, std::string name, bool counts) {
  require_dims(x.rows() == y.size(), "dataset: inputs/targets row count differ");
  if (x.rows() == 0) throw EmptyDataset("dataset '" + name + "' has no rows");
  Normalization norm;
  norm.x_means = x.colwise().mean().transpose();
  norm.y_mean = counts ? 0.0 : y.mean();
  return centered(std::move(x), std::move(y), norm, std::move(name), counts);
}

Dataset subset(const Dataset& d, std::span<const Eigen::Index> idx) {
  MatrixXd x;
  VectorXd y;
  take_rows(d, idx, x, y);
  return normalize(std::move(x), std::move(y), d.name, d.counts);
}

Dataset subset(const Dataset& d, std::span<const Eigen::Index> idx, const Normalization& norm) {
  MatrixXd x;
  VectorXd y;
  take_rows(d, idx, x, y);
  require_dims(norm.x_means.size() == d.dim(), "normalization dimension differs from the data");
  return centered(std::move(x), std::move(y), norm, d.name, d.counts);
}

namespace {

struct NumericRows {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::size_t ncols = 0;
  int dropped = 0;
};

NumericRows read_numeric_rows(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  NumericRows out;
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    if (header && !seen_header) {
      out.names = cells;
      out.ncols = cells.size();
      seen_header = true;
      continue;
    }
    if (out.ncols == 0) out.ncols = cells.size();
    if (cells.size() != out.ncols)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(out.ncols) + " columns, found " + std::to_string(cells.size()));
    std::vector<double> vals(out.ncols);
    bool finite = true;
    for (std::size_t j = 0; j < out.ncols; ++j) {
      vals[j] = parse_cell(cells[j], path, lineno);
      finite = finite && std::isfinite(vals[j]);
    }
    if (!finite) {
      ++out.dropped;
      continue;
    }
    out.rows.push_back(std::move(vals));
  }
  if (out.dropped > 0)
    std::cerr << "warning: " << path << ": dropped " << out.dropped
              << " row(s) with NaN/Inf values\n";
  return out;
}

}  // namespace

MatrixXd load_matrix_csv(const std::string& path, bool header) {
  const NumericRows r = read_numeric_rows(path, header);
  if (r.rows.empty()) throw EmptyDataset(path + ": no usable rows");
  MatrixXd x(static_cast<Eigen::Index>(r.rows.size()), static_cast<Eigen::Index>(r.ncols));
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    for (std::size_t j = 0; j < r.ncols; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.rows[i][j];
  return x;
}

Dataset load_csv(const std::string& path, const CsvOptions& opt, int* rejected) {
  NumericRows parsed = read_numeric_rows(path, opt.header);
  const std::vector<std::string>& names = parsed.names;
  std::vector<std::vector<double>>& rows = parsed.rows;
  const std::size_t ncols = parsed.ncols;
  const int dropped = parsed.dropped;
  int target = opt.target_index;

  if (ncols < 2) throw ParseError(path + ": need at least one input column and a target column");
  if (target < 0 && !opt.target.empty()) {
    for (std::size_t j = 0; j < names.size(); ++j)
      if (names[j] == opt.target) target = static_cast<int>(j);
    if (target < 0) throw ParseError(path + ": no column named '" + opt.target + "'");
  }
  if (target < 0) target = static_cast<int>(ncols) - 1;
  if (target >= static_cast<int>(ncols))
    throw ParseError(path + ": target column " + std::to_string(target) + " out of range");
  if (rejected) *rejected = dropped;
  if (rows.empty()) throw EmptyDataset(path + ": no usable rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  MatrixXd x(n, static_cast<Eigen::Index>(ncols) - 1);
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (static_cast<int>(j) == target) {
        y[i] = rows[static_cast<std::size_t>(i)][j];
      } else {
        x(i, c++) = rows[static_cast<std::size_t>(i)][j];
      }
    }
  }
  if (opt.counts)
    for (Eigen::Index i = 0; i < n; ++i)
      if (y[i] < 0.0 || y[i] != std::round(y[i]))
        throw ParseError(path + ": count target must be a non-negative integer");
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  return normalize(std::move(x), std::move(y), name, opt.counts);
}

void write_csv(const std::string& path, const Dataset& d) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write '" + path + "'");
  for (Eigen::Index j = 0; j < d.dim(); ++j) std::fprintf(f, "x%ld,", static_cast<long>(j));
  std::fprintf(f, "y\n");
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    for (Eigen::Index j = 0; j < d.dim(); ++j) std::fprintf(f, "%.17g,", d.x_raw(i, j));
    std::fprintf(f, "%.17g\n", d.y_raw[i]);
  }
  if (std::fclose(f) != 0) throw IoError("error while writing '" + path + "'");
}

Dataset snelson_like_table() {
  Random rng(kSnelsonTableSeed);
  const Eigen::Index n = kSnelsonTableSize;
  MatrixXd x(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = rng.uniform(0.06, 5.97);
  // Latent draw from a squared-exponential GP, then homoscedastic noise. The
  // kernel is evaluated with std::exp so the table does not depend on which
  // SIMD variant is active.
  MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = x(i, 0) - x(j, 0);
      k(i, j) = 0.712 * std::exp(-0.5 * d * d / 0.597);
    }
  const SpdFactor<double> l = cholesky(k, 1e-10);
  VectorXd eps(n);
  for (Eigen::Index i = 0; i < n; ++i) eps[i] = rng.normal();
  VectorXd y = l.lower * eps;
  for (Eigen::Index i = 0; i < n; ++i) y[i] += std::sqrt(0.0715) * rng.normal();
  return normalize(std::move(x), std::move(y), "snelson_like");
}

Dataset make_snelson_like(int n, std::uint64_t seed) {
  Dataset full = snelson_like_table();
  if (n >= full.size()) return full;
  if (n < 1) throw InputError("subsample size must be >= 1");
  Random rng(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(full.size()));
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  idx.resize(static_cast<std::size_t>(n));
  Dataset d = subset(full, idx);
  d.name = "snelson_like_" + std::to_string(n);
  return d;
}

Dataset make_poisson_toy(std::uint64_t seed) {
  Random rng(seed);
  const Eigen::Index n = 50;
  MatrixXd x(n, 1);
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = -10.0 + 20.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    y[i] = static_cast<double>(rng.poisson(3.5 + 3.0 * std::sin(x(i, 0))));
  }
  return normalize(std::move(x), std::move(y), "poisson_toy", true);
}

Dataset make_synthetic_regression(int n, int dim, double noise_sd, std::uint64_t seed) {
  if (n < 1 || dim < 1) throw InputError("synthetic data needs n >= 1 and dim >= 1");
  Random rng(seed);
  MatrixXd x(n, dim);
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double f = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      x(i, j) = rng.uniform(-2.0, 2.0);
      f += j % 2 == 0 ? std::sin(3.0 * x(i, j)) / static_cast<double>(j + 1)
                      : 0.5 * std::cos(x(i, j) * 1.7) / static_cast<double>(j);
    }
    y[i] = f + noise_sd * rng.normal();
  }
  return normalize(std::move(x), std::move(y), "synthetic_" + std::to_string(n));
}

Split split_indices(Eigen::Index n, double test_fraction, double validation_fraction,
                    std::uint64_t seed) {
  if (test_fraction < 0.0 || validation_fraction < 0.0 || test_fraction >= 1.0 ||
      validation_fraction >= 1.0)
    throw ConfigError("split fractions must lie in [0, 1)");
  Random rng(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  const std::size_t n_train_all = idx.size() - n_test;
  const auto n_val =
      static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(n_train_all)));
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test),
                      idx.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), idx.end());
  if (s.train.empty()) throw ConfigError("split leaves no training points");
  return s;
}

}  // namespace tsgp
