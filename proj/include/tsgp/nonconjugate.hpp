#pragma once

#include <cmath>
#include <span>

#include "tsgp/quadrature.hpp"
#include "tsgp/stochastic.hpp"

namespace tsgp {

/// Spherical scaling of the conditional covariance: q(f | u) has covariance
/// v (K_ff - Q_ff). v = 1 recovers the conditional GP prior.
struct ScalarV {
  double v = 1.0;

  explicit ScalarV(double value = 1.0) : v(value) {
    if (!(v > 0.0)) throw NonPositiveV("scalar v must be > 0");
  }
};

template <typename T>
struct MarginalQfi {
  T mean;
  T variance;  // v r_i + k_i^T K_uu^{-1} S K_uu^{-1} k_i
};

/// q(f_i) under the spherical-V approximation for cache row `row`.
template <typename T>
MarginalQfi<T> marginal_qfi(const GaussianVariational<T>& q, const NystromCache<T>& c, const T& v,
                            Eigen::Index row) {
  if (row < 0 || row >= c.size())
    throw IndexOutOfRange("row " + std::to_string(row) + " outside cache of size " +
                          std::to_string(c.size()));
  q.validate(c.a.rows());
  Vec<T> proj = c.a.col(row);
  if (!q.whitened) proj = solve_triangular(c.kuu, proj, true);
  const Mat<T> lq = q.cov_factor.template triangularView<Eigen::Lower>();
  return {proj.dot(q.mean), v * c.resid[row] + (lq.transpose() * proj).squaredNorm()};
}

enum class ExpectationMethod { kClosedForm, kGaussHermite };

inline void check_count(double y) {
  if (y < 0.0) throw NegativeCount("Poisson count must be >= 0, got " + std::to_string(y));
  if (std::abs(y - std::round(y)) > 1e-9)
    throw InputError("Poisson count must be an integer, got " + std::to_string(y));
}

inline double poisson_log_pmf(double y, double log_rate) {
  return y * log_rate - std::exp(log_rate) - std::lgamma(y + 1.0);
}

/// E_{N(f | mean, variance)}[log Poisson(y | exp f)] = y mean - exp(mean + variance / 2) - log y!
template <typename T>
T expected_poisson_loglik(const MarginalQfi<T>& m, double y) {
  using std::exp;
  check_count(y);
  if (value_of(m.variance) < 0.0) throw InputError("marginal variance must be >= 0");
  return T(y) * m.mean - exp(m.mean + T(0.5) * m.variance) - T(std::lgamma(y + 1.0));
}

/// Same expectation through Gauss-Hermite quadrature; the path used for
/// likelihoods without a closed form.
double expected_poisson_loglik(const MarginalQfi<double>& m, double y, ExpectationMethod method,
                               int order = 20);

/// Sum over cache rows of E_{q(f_i)}[log p(y_i | f_i)] scaled by `scale`,
/// minus N/2 (v - log v - 1) and KL[q(u) || p(u)].
template <typename T>
BoundTerms<T> poisson_terms(const GaussianVariational<T>& q, const SparseModel<T>& model,
                            const NystromCache<T>& c, const T& v, double scale) {
  using std::log;
  if (!(value_of(v) > 0.0)) throw NonPositiveV("scalar v must be > 0");
  const LatentMarginals<T> lm = latent_marginals(q, c);
  BoundTerms<T> t;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const MarginalQfi<T> m{lm.mean[i], v * c.resid[i] + lm.var[i]};
    t.fit += expected_poisson_loglik(m, model.targets[c.rows[static_cast<std::size_t>(i)]]);
  }
  t.fit *= T(scale);
  const double n = static_cast<double>(model.num_data());
  t.reg = T(-0.5 * n) * (v - log(v) - T(1.0));
  t.kl = kl_qu_pu(q, c.kuu);
  t.value = t.fit + t.reg - t.kl;
  return t;
}

template <typename T>
BoundTerms<T> elbo_nonconjugate(const GaussianVariational<T>& q, const SparseModel<T>& model,
                                const NystromCache<T>& c, const T& v) {
  require_dims(c.size() == model.num_data(), "non-conjugate bound needs a cache over all rows");
  return poisson_terms(q, model, c, v, 1.0);
}

/// Minibatch estimate: only the likelihood sum is rescaled by N / |B|.
template <typename T>
T elbo_nonconjugate_minibatch(const GaussianVariational<T>& q, const SparseModel<T>& model,
                              const NystromCache<T>& batch_cache, const T& v) {
  if (batch_cache.size() == 0) throw EmptyBatch("minibatch must contain at least one row");
  const double scale =
      static_cast<double>(model.num_data()) / static_cast<double>(batch_cache.size());
  return poisson_terms(q, model, batch_cache, v, scale).value;
}

BoundReport nonconjugate_report(const GaussianVariational<double>& q,
                                const SparseModel<double>& model, const NystromCache<double>& c,
                                ScalarV v);

/// log of the Poisson predictive probability integral Poisson(y | exp f) N(f | mean, var) df.
double poisson_log_predictive(double y, double mean, double var, int order = 50);

}  // namespace tsgp
