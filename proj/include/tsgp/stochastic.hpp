#pragma once

#include <cmath>
#include <span>

#include "tsgp/collapsed.hpp"

namespace tsgp {

enum class PenaltyVariant {
  kClassic,  // r_i / (2 noise)
  kNew,      // 1/2 log(1 + r_i / noise)
};

/// KL[q(u) || p(u)]. Whitened: against N(0, I); unwhitened: against N(0, K_uu).
template <typename T>
T kl_qu_pu(const GaussianVariational<T>& q, const SpdFactor<T>& kuu) {
  using std::log;
  const Eigen::Index m = kuu.size();
  q.validate(m);
  const Mat<T> lq = q.cov_factor.template triangularView<Eigen::Lower>();
  T logdet_s(0.0);
  for (Eigen::Index i = 0; i < m; ++i) logdet_s += log(lq(i, i));
  logdet_s *= T(2.0);
  const T md = T(static_cast<double>(m));
  if (q.whitened) {
    return T(0.5) * (lq.squaredNorm() + q.mean.squaredNorm() - md - logdet_s);
  }
  const Mat<T> li_lq = solve_triangular(kuu, lq);
  const Vec<T> li_m = solve_triangular(kuu, q.mean);
  return T(0.5) * (li_lq.squaredNorm() + li_m.squaredNorm() - md + logdet(kuu) - logdet_s);
}

/// Mean k_i^T K_uu^{-1} m and variance k_i^T K_uu^{-1} S K_uu^{-1} k_i for every
/// cache row (whitened: a_i^T m and a_i^T S a_i with a_i = L^{-1} k_i).
template <typename T>
LatentMarginals<T> latent_marginals(const GaussianVariational<T>& q, const NystromCache<T>& c) {
  q.validate(c.a.rows());
  const Mat<T> lq = q.cov_factor.template triangularView<Eigen::Lower>();
  Mat<T> proj = q.whitened ? c.a : solve_triangular(c.kuu, c.a, true);  // M x R
  LatentMarginals<T> out;
  out.mean = proj.transpose() * q.mean;
  const Mat<T> sp = lq.transpose() * proj;
  out.var = sp.colwise().squaredNorm().transpose();
  return out;
}

namespace detail {

template <typename T>
T gaussian_expected_loglik(double y, const T& mean, const T& var, const T& noise) {
  using std::log;
  const T diff = T(y) - mean;
  return T(-0.5 * kLog2Pi) - T(0.5) * log(noise) - (diff * diff + var) / (T(2.0) * noise);
}

template <typename T>
T penalty(const T& resid, const T& noise, PenaltyVariant variant) {
  using std::log1p;
  return variant == PenaltyVariant::kClassic ? resid / (T(2.0) * noise)
                                             : T(0.5) * log1p(resid / noise);
}

}  // namespace detail

/// E_{q(u)}[log N(y_i | k_i^T K_uu^{-1} u, noise)] for cache row `row`.
template <typename T>
T expected_gaussian_loglik(const GaussianVariational<T>& q, const SparseModel<T>& model,
                           const NystromCache<T>& c, Eigen::Index row) {
  if (row < 0 || row >= c.size())
    throw IndexOutOfRange("row " + std::to_string(row) + " outside cache of size " +
                          std::to_string(c.size()));
  q.validate(c.a.rows());
  Vec<T> proj = c.a.col(row);
  if (!q.whitened) proj = solve_triangular(c.kuu, proj, true);
  const Mat<T> lq = q.cov_factor.template triangularView<Eigen::Lower>();
  const T mean = proj.dot(q.mean);
  const T var = (lq.transpose() * proj).squaredNorm();
  return detail::gaussian_expected_loglik(model.targets[c.rows[static_cast<std::size_t>(row)]], mean,
                                          var, model.noise_var);
}

/// Sum over cache rows of [expected log likelihood - penalty], scaled by `scale`,
/// minus KL[q(u) || p(u)].
template <typename T>
BoundTerms<T> svgp_terms(const GaussianVariational<T>& q, const SparseModel<T>& model,
                         const NystromCache<T>& c, PenaltyVariant variant, double scale) {
  const LatentMarginals<T> lm = latent_marginals(q, c);
  BoundTerms<T> t;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    t.fit += detail::gaussian_expected_loglik(model.targets[c.rows[static_cast<std::size_t>(i)]],
                                              lm.mean[i], lm.var[i], model.noise_var);
    t.reg -= detail::penalty(c.resid[i], model.noise_var, variant);
  }
  t.fit *= T(scale);
  t.reg *= T(scale);
  t.kl = kl_qu_pu(q, c.kuu);
  t.value = t.fit + t.reg - t.kl;
  return t;
}

/// Full-data uncollapsed bound; `c` must cover every training row.
template <typename T>
BoundTerms<T> elbo_svgp_uncollapsed(const GaussianVariational<T>& q, const SparseModel<T>& model,
                                    const NystromCache<T>& c, PenaltyVariant variant) {
  require_dims(c.size() == model.num_data(), "uncollapsed bound needs a cache over all rows");
  return svgp_terms(q, model, c, variant, 1.0);
}

/// Unbiased minibatch estimate: (N / |B|) sum_{i in B} [...] - KL, where
/// `batch_cache` was built for the batch rows only.
template <typename T>
T elbo_svgp_minibatch(const GaussianVariational<T>& q, const SparseModel<T>& model,
                      const NystromCache<T>& batch_cache, PenaltyVariant variant) {
  if (batch_cache.size() == 0) throw EmptyBatch("minibatch must contain at least one row");
  const double scale =
      static_cast<double>(model.num_data()) / static_cast<double>(batch_cache.size());
  return svgp_terms(q, model, batch_cache, variant, scale).value;
}

template <typename T>
T elbo_svgp_minibatch(const GaussianVariational<T>& q, const SparseModel<T>& model,
                      std::span<const Eigen::Index> batch, PenaltyVariant variant) {
  if (batch.empty()) throw EmptyBatch("minibatch must contain at least one row");
  return elbo_svgp_minibatch(q, model, build_cache(model, batch), variant);
}

BoundReport svgp_report(const GaussianVariational<double>& q, const SparseModel<double>& model,
                        const NystromCache<double>& c, PenaltyVariant variant);

}  // namespace tsgp
