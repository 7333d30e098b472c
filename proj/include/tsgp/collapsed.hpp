#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "tsgp/kernels.hpp"
#include "tsgp/linalg.hpp"
#include "tsgp/variational.hpp"

namespace tsgp {

/// Sparse GP regression model over a borrowed dataset.
///
/// `inputs` and `targets` are non-owning views; the caller keeps the data
/// alive for as long as the model (and every cache built from it) is used.
template <typename T>
struct SparseModel {
  KernelSpec<T> spec;
  T noise_var;
  Mat<T> inducing;  // M x d
  Eigen::Ref<const MatrixXd> inputs;
  Eigen::Ref<const VectorXd> targets;
  double jitter_rel = kDefaultRelativeJitter;

  SparseModel(KernelSpec<T> s, T noise, Mat<T> z, const MatrixXd& x, const VectorXd& y,
              double jitter = kDefaultRelativeJitter)
      : spec(std::move(s)), noise_var(noise), inducing(std::move(z)), inputs(x), targets(y),
        jitter_rel(jitter) {
    validate();
  }

  Eigen::Index num_data() const { return inputs.rows(); }
  Eigen::Index num_inducing() const { return inducing.rows(); }

  void validate() const {
    if (inducing.rows() < 1) throw InputError("sparse model needs at least one inducing point");
    require_dims(inducing.cols() == inputs.cols(), "inducing inputs have dimension " +
                                                       std::to_string(inducing.cols()) +
                                                       ", data has " + std::to_string(inputs.cols()));
    require_dims(inputs.rows() == targets.size(), "sparse model: inputs/targets row count differ");
    if (!(value_of(noise_var) > 0.0)) throw InputError("noise variance must be > 0");
    for (Eigen::Index j = 0; j < inducing.cols(); ++j)
      for (Eigen::Index i = 0; i < inducing.rows(); ++i)
        if (!std::isfinite(value_of(inducing(i, j))))
          throw InputError("inducing inputs must be finite");
  }
};

/// Per-row Nystrom quantities for a set of training rows (all rows, or a
/// minibatch). `a` = L_uu^{-1} K_uf, so q_ii is the squared norm of column i.
template <typename T>
struct NystromCache {
  SpdFactor<T> kuu;
  Mat<T> kfu;    // R x M
  Mat<T> a;      // M x R
  Vec<T> qdiag;  // R
  Vec<T> kdiag;  // R
  Vec<T> resid;  // k_ii - q_ii, clamped at 0
  std::vector<Eigen::Index> rows;  // training-row index of each cache row
  int clamped_count = 0;
  double min_raw_resid = 0.0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(rows.size()); }
};

namespace detail {

template <typename T>
Vec<T> column_sq_norms(const Mat<T>& a) {
  if constexpr (std::is_same_v<T, double>) {
    Vec<double> out(a.cols());
    if (a.cols() > 0)
      simd::active_ops().col_sq_norms(a.data(), static_cast<std::size_t>(a.rows()),
                                      static_cast<std::size_t>(a.cols()), out.data());
    return out;
  } else {
    return a.colwise().squaredNorm().transpose();
  }
}

template <typename T>
SpdFactor<T> factor_kuu(const SparseModel<T>& model) {
  Mat<T> kuu = cross_cov(model.spec, model.inducing, model.inducing);
  // The base jitter scales with the kernel, so it is part of the differentiated
  // objective; only retries on failure are treated as constants.
  const T shift = T(model.jitter_rel) * kuu.diagonal().mean();
  kuu.diagonal().array() += shift;
  return cholesky(kuu, 0.0);
}

}  // namespace detail

/// Builds the Nystrom cache for the given training rows (all rows when empty).
/// Costs O(R M^2) for R rows.
template <typename T>
NystromCache<T> build_cache(const SparseModel<T>& model, std::span<const Eigen::Index> rows = {}) {
  NystromCache<T> c;
  const Eigen::Index n = model.num_data();
  if (rows.empty()) {
    c.rows.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) c.rows[static_cast<std::size_t>(i)] = i;
  } else {
    c.rows.assign(rows.begin(), rows.end());
    for (auto r : c.rows)
      if (r < 0 || r >= n) throw IndexOutOfRange("cache row " + std::to_string(r) + " out of range");
  }
  const auto r = c.size();
  MatrixXd x(r, model.inputs.cols());
  for (Eigen::Index i = 0; i < r; ++i) x.row(i) = model.inputs.row(c.rows[static_cast<std::size_t>(i)]);

  c.kuu = detail::factor_kuu(model);
  c.kfu = cross_cov(model.spec, x, model.inducing);
  c.a = solve_triangular(c.kuu, c.kfu.transpose());
  c.qdiag = detail::column_sq_norms(c.a);
  c.kdiag = diag_cov(model.spec, x);
  c.resid.resize(r);
  c.min_raw_resid = r > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    const T raw = c.kdiag[i] - c.qdiag[i];
    c.min_raw_resid = std::min(c.min_raw_resid, value_of(raw));
    if (value_of(raw) < 0.0) {
      c.resid[i] = T(0.0);
      ++c.clamped_count;
    } else {
      c.resid[i] = raw;
    }
  }
  return c;
}

template <typename T>
Vec<T> cache_targets(const SparseModel<T>& model, const NystromCache<T>& c) {
  Vec<T> y(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i)
    y[i] = T(model.targets[c.rows[static_cast<std::size_t>(i)]]);
  return y;
}

template <typename T>
struct BoundTerms {
  T value = T(0.0);
  T fit = T(0.0);  // DTC log likelihood, or summed expected log likelihood
  T reg = T(0.0);  // residual regularizer (<= 0)
  T kl = T(0.0);   // KL[q(u) || p(u)] (uncollapsed bounds only)
};

struct BoundReport {
  double bound = 0.0;
  double dtc_term = 0.0;
  double reg_term = 0.0;
  double kl_term = 0.0;
  double v_min = 1.0;
  double v_max = 1.0;
  double resid_min = 0.0;
  double resid_max = 0.0;
  int clamped_count = 0;
  std::vector<double> v;  // per-row v_i when the bound defines one
};

enum class CollapsedVariant { kClassic, kNew, kSpherical };

/// log N(y | 0, Q_ff + noise I) in O(N M^2).
///
/// With Lambda = K_uu + noise^{-1} K_uf K_fu = L B L^T and B = I + A A^T / noise:
/// log|Q_ff + noise I| = N log noise + log|Lambda| - log|K_uu| = N log noise + log|B|,
/// and the quadratic form follows from Woodbury through B.
template <typename T>
T dtc_log_likelihood(const SparseModel<T>& model, const NystromCache<T>& c) {
  using std::log;
  const Eigen::Index n = c.size();
  const Eigen::Index m = c.a.rows();
  const T noise = model.noise_var;
  const Vec<T> y = cache_targets(model, c);
  Mat<T> b = Mat<T>::Identity(m, m);
  b.noalias() += (c.a * c.a.transpose()) / noise;
  const SpdFactor<T> lb = cholesky(b, 0.0);
  const Vec<T> cvec = solve_triangular(lb, c.a * y) / noise;
  const double nd = static_cast<double>(n);
  return T(-0.5 * nd * kLog2Pi) - T(0.5 * nd) * log(noise) - T(0.5) * logdet(lb) -
         T(0.5) * y.squaredNorm() / noise + T(0.5) * cvec.squaredNorm();
}

/// Collapsed bound: DTC log likelihood plus the variant's residual regularizer.
///   classic:   -1/(2 noise) sum r_i
///   new:       -1/2 sum log(1 + r_i / noise)
///   spherical: -N/2 log(1 + sum r_i / (N noise))
template <typename T>
BoundTerms<T> collapsed_bound(const SparseModel<T>& model, const NystromCache<T>& c,
                              CollapsedVariant variant) {
  using std::log;
  using std::log1p;
  BoundTerms<T> t;
  t.fit = dtc_log_likelihood(model, c);
  const T noise = model.noise_var;
  const Eigen::Index n = c.size();
  switch (variant) {
    case CollapsedVariant::kClassic:
      t.reg = -c.resid.sum() / (T(2.0) * noise);
      break;
    case CollapsedVariant::kNew: {
      T s(0.0);
      for (Eigen::Index i = 0; i < n; ++i) s += log1p(c.resid[i] / noise);
      t.reg = T(-0.5) * s;
      break;
    }
    case CollapsedVariant::kSpherical:
      if (n > 0) {
        const double nd = static_cast<double>(n);
        t.reg = T(-0.5 * nd) * log1p(c.resid.sum() / (T(nd) * noise));
      }
      break;
  }
  t.value = t.fit + t.reg;
  return t;
}

/// v_i* = (1 + r_i / noise)^{-1}
template <typename T>
Vec<T> optimal_v(const NystromCache<T>& c, T noise_var) {
  Vec<T> v(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) v[i] = T(1.0) / (T(1.0) + c.resid[i] / noise_var);
  return v;
}

/// Optimal scalar v when V is restricted to v I: (1 + sum r_i / (N noise))^{-1}.
template <typename T>
T optimal_spherical_v(const NystromCache<T>& c, T noise_var) {
  if (c.size() == 0) return T(1.0);
  return T(1.0) / (T(1.0) + c.resid.sum() / (T(static_cast<double>(c.size())) * noise_var));
}

/// KL[q(f|u) || p(f|u)] = 1/2 sum (v_i - log v_i - 1)
template <typename T>
T kl_qfu_pfu(const Vec<T>& v) {
  using std::log;
  T s(0.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(value_of(v[i]) > 0.0)) throw NonPositiveV("v[" + std::to_string(i) + "] must be > 0");
    s += v[i] - log(v[i]) - T(1.0);
  }
  return T(0.5) * s;
}

BoundReport elbo_sgpr(const SparseModel<double>& model, const NystromCache<double>& c);
BoundReport elbo_sgpr_new(const SparseModel<double>& model, const NystromCache<double>& c);
BoundReport elbo_sgpr_artemev(const SparseModel<double>& model, const NystromCache<double>& c);
BoundReport collapsed_report(const SparseModel<double>& model, const NystromCache<double>& c,
                             CollapsedVariant variant);

struct OptimalQu {
  VectorXd mean;
  MatrixXd cov;
};

/// q*(u) = N(noise^{-1} K_uu Lambda^{-1} K_uf y, K_uu Lambda^{-1} K_uu); the same
/// distribution maximizes every collapsed variant.
OptimalQu optimal_qu(const SparseModel<double>& model, const NystromCache<double>& c);

/// q*(u) in whitened coordinates: mean B^{-1} A y / noise, covariance B^{-1}.
template <typename T>
GaussianVariational<T> optimal_qu_whitened(const SparseModel<T>& model, const NystromCache<T>& c) {
  const Eigen::Index m = c.a.rows();
  const T noise = model.noise_var;
  Mat<T> b = Mat<T>::Identity(m, m);
  b.noalias() += (c.a * c.a.transpose()) / noise;
  const SpdFactor<T> lb = cholesky(b, 0.0);
  GaussianVariational<T> q;
  q.whitened = true;
  q.mean = cholesky_solve(lb, c.a * cache_targets(model, c)) / noise;
  // B^{-1} = LB^{-T} LB^{-1}; its Cholesky factor is recovered by refactoring.
  const Mat<T> lbinv = solve_triangular(lb, Mat<T>::Identity(m, m));
  q.cov_factor = cholesky(Mat<T>(lbinv.transpose() * lbinv), 0.0).lower;
  return q;
}

/// Converts q(u) to unwhitened (mean, covariance) using the K_uu factor.
template <typename T>
std::pair<Vec<T>, Mat<T>> unwhitened_moments(const GaussianVariational<T>& q,
                                             const SpdFactor<T>& kuu) {
  if (!q.whitened) return {q.mean, q.cov()};
  const Mat<T> ls = kuu.lower * q.cov_factor.template triangularView<Eigen::Lower>();
  return {kuu.lower * q.mean, ls * ls.transpose()};
}

/// q(f*) = integral p(f* | u) q(u) du:
/// mean K_*u K_uu^{-1} m, cov K_** - K_*u K_uu^{-1} K_u* + K_*u K_uu^{-1} S K_uu^{-1} K_u*.
GaussianPrediction sparse_predict(const SparseModel<double>& model, const VectorXd& mean,
                                  const MatrixXd& cov, const MatrixXd& xstar,
                                  bool observation_noise = false);
GaussianPrediction sparse_predict(const SparseModel<double>& model, const OptimalQu& qu,
                                  const MatrixXd& xstar, bool observation_noise = false);
GaussianPrediction sparse_predict(const SparseModel<double>& model,
                                  const GaussianVariational<double>& q, const MatrixXd& xstar,
                                  bool observation_noise = false);

}  // namespace tsgp
