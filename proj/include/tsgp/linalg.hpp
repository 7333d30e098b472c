#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "tsgp/error.hpp"
#include "tsgp/types.hpp"

namespace tsgp {

// Lower Cholesky factor of (A + jitter * I).
template <typename T>
struct SpdFactor {
  Mat<T> lower;
  double jitter_applied = 0.0;

  Eigen::Index size() const { return lower.rows(); }
};

struct JitterPolicy {
  // Jitter tried after a failed unjittered attempt, relative to mean(diag(A)).
  double first_retry_rel = 1e-6;
  // Largest jitter ever applied, relative to mean(diag(A)).
  double max_rel = 1e-2;
  int max_retries = 5;
};

inline constexpr double kDefaultRelativeJitter = 1e-6;

namespace detail {

template <typename T>
bool try_llt(const Mat<T>& a, double jitter, Mat<T>& out) {
  Mat<T> shifted = a;
  if (jitter > 0.0) shifted.diagonal().array() += T(jitter);
  Eigen::LLT<Mat<T>> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  out = llt.matrixL();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double d = value_of(out(i, i));
    if (!(d > 0.0) || !std::isfinite(d)) return false;
  }
  return true;
}

}  // namespace detail

/// Factorizes the symmetrized input. The first attempt uses `base_jitter`; on
/// failure the jitter grows by a factor of ten per retry, capped at
/// `max_rel * mean(diag(A))`. Throws SingularMatrix when every attempt fails.
template <typename T>
SpdFactor<T> cholesky(const Mat<T>& a, double base_jitter = 0.0, const JitterPolicy& policy = {}) {
  require_dims(a.rows() == a.cols(), "cholesky: matrix must be square");
  if (base_jitter < 0.0) throw InputError("cholesky: base_jitter must be >= 0");
  const Eigen::Index n = a.rows();
  if (n == 0) return {Mat<T>(0, 0), base_jitter};

  const Mat<T> sym = (a + a.transpose()) * T(0.5);
  double mean_diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean_diag += value_of(sym(i, i));
  mean_diag /= static_cast<double>(n);
  const double scale = mean_diag > 0.0 && std::isfinite(mean_diag) ? mean_diag : 1.0;
  const double cap = policy.max_rel * scale;

  SpdFactor<T> f;
  double jitter = base_jitter;
  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    if (detail::try_llt(sym, jitter, f.lower)) {
      f.jitter_applied = jitter;
      return f;
    }
    if (jitter >= cap) break;
    jitter = jitter > 0.0 ? jitter * 10.0 : policy.first_retry_rel * scale;
    jitter = std::min(jitter, cap);
  }
  throw SingularMatrix("cholesky: matrix not positive definite after jitter " +
                       std::to_string(jitter) + " (n=" + std::to_string(n) + ")");
}

/// Solves L X = B, or L^T X = B when `transpose` is set.
template <typename T, typename Derived>
Mat<T> solve_triangular(const SpdFactor<T>& f, const Eigen::MatrixBase<Derived>& b,
                        bool transpose = false) {
  require_dims(b.rows() == f.size(), "solve_triangular: row count " + std::to_string(b.rows()) +
                                         " != factor size " + std::to_string(f.size()));
  Mat<T> x = b.template cast<T>();
  if (transpose)
    f.lower.template triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  else
    f.lower.template triangularView<Eigen::Lower>().solveInPlace(x);
  return x;
}

/// A^{-1} B through two triangular solves.
template <typename T, typename Derived>
Mat<T> cholesky_solve(const SpdFactor<T>& f, const Eigen::MatrixBase<Derived>& b) {
  return solve_triangular(f, solve_triangular(f, b, false), true);
}

template <typename T>
T logdet(const SpdFactor<T>& f) {
  using std::log;
  T s(0.0);
  for (Eigen::Index i = 0; i < f.size(); ++i) s += log(f.lower(i, i));
  return T(2.0) * s;
}

}  // namespace tsgp
