#include "tsgp/collapsed.hpp"

#include <algorithm>

namespace tsgp {

BoundReport collapsed_report(const SparseModel<double>& model, const NystromCache<double>& c,
                             CollapsedVariant variant) {
  const BoundTerms<double> t = collapsed_bound(model, c, variant);
  BoundReport r;
  r.bound = t.value;
  r.dtc_term = t.fit;
  r.reg_term = t.reg;
  r.clamped_count = c.clamped_count;
  if (c.size() > 0) {
    r.resid_min = c.resid.minCoeff();
    r.resid_max = c.resid.maxCoeff();
  }
  switch (variant) {
    case CollapsedVariant::kClassic:
      break;
    case CollapsedVariant::kNew: {
      const VectorXd v = optimal_v(c, model.noise_var);
      r.v.assign(v.data(), v.data() + v.size());
      if (v.size() > 0) {
        r.v_min = v.minCoeff();
        r.v_max = v.maxCoeff();
      }
      break;
    }
    case CollapsedVariant::kSpherical:
      r.v_min = r.v_max = optimal_spherical_v(c, model.noise_var);
      break;
  }
  return r;
}

BoundReport elbo_sgpr(const SparseModel<double>& model, const NystromCache<double>& c) {
  return collapsed_report(model, c, CollapsedVariant::kClassic);
}

BoundReport elbo_sgpr_new(const SparseModel<double>& model, const NystromCache<double>& c) {
  return collapsed_report(model, c, CollapsedVariant::kNew);
}

BoundReport elbo_sgpr_artemev(const SparseModel<double>& model, const NystromCache<double>& c) {
  return collapsed_report(model, c, CollapsedVariant::kSpherical);
}

OptimalQu optimal_qu(const SparseModel<double>& model, const NystromCache<double>& c) {
  const GaussianVariational<double> w = optimal_qu_whitened(model, c);
  auto [mean, cov] = unwhitened_moments(w, c.kuu);
  return {std::move(mean), 0.5 * (cov + cov.transpose())};
}

GaussianPrediction sparse_predict(const SparseModel<double>& model, const VectorXd& mean,
                                  const MatrixXd& cov, const MatrixXd& xstar,
                                  bool observation_noise) {
  const Eigen::Index m = model.num_inducing();
  require_dims(mean.size() == m && cov.rows() == m && cov.cols() == m,
               "sparse_predict: q(u) must be " + std::to_string(m) + "-dimensional");
  require_dims(xstar.cols() == model.inputs.cols(), "sparse_predict: test inputs have dimension " +
                                                        std::to_string(xstar.cols()) + ", expected " +
                                                        std::to_string(model.inputs.cols()));
  const SpdFactor<double> kuu = detail::factor_kuu(model);
  const MatrixXd kus = cross_cov(model.spec, model.inducing, xstar);
  const MatrixXd v = solve_triangular(kuu, kus);     // L^{-1} K_u*
  const MatrixXd w = solve_triangular(kuu, v, true);  // K_uu^{-1} K_u*
  GaussianPrediction p;
  p.mean = w.transpose() * mean;
  p.cov = cross_cov(model.spec, xstar, xstar) - v.transpose() * v + w.transpose() * cov * w;
  p.cov = 0.5 * (p.cov + p.cov.transpose());
  if (observation_noise) p.cov.diagonal().array() += model.noise_var;
  return p;
}

GaussianPrediction sparse_predict(const SparseModel<double>& model, const OptimalQu& qu,
                                  const MatrixXd& xstar, bool observation_noise) {
  return sparse_predict(model, qu.mean, qu.cov, xstar, observation_noise);
}

GaussianPrediction sparse_predict(const SparseModel<double>& model,
                                  const GaussianVariational<double>& q, const MatrixXd& xstar,
                                  bool observation_noise) {
  q.validate(model.num_inducing());
  const SpdFactor<double> kuu = detail::factor_kuu(model);
  auto [mean, cov] = unwhitened_moments(q, kuu);
  return sparse_predict(model, mean, cov, xstar, observation_noise);
}

}  // namespace tsgp
