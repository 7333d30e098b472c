#pragma once

#include <span>

#include "tsgp/collapsed.hpp"
#include "tsgp/exact_gp.hpp"
#include "tsgp/nonconjugate.hpp"
#include "tsgp/stochastic.hpp"
#include "tsgp/trainer/gradient.hpp"
#include "tsgp/trainer/transforms.hpp"

namespace tsgp {

/// Training objective for `lay.method` at unconstrained parameters `p`.
/// Stochastic methods use the rows in `batch` with the likelihood sum scaled
/// by N / |batch|; an empty batch means all rows (no scaling). Returns the
/// value together with its decomposition.
template <typename T>
BoundTerms<T> objective_terms(const ParamLayout& lay, const Vec<T>& p, const MatrixXd& x,
                              const VectorXd& y, std::span<const Eigen::Index> batch,
                              double jitter_rel) {
  const Constrained<T> c = constrain(lay, p);
  BoundTerms<T> t;
  switch (lay.method) {
    case Method::kExact: {
      const ExactGpState<T> st(c.spec, c.noise_var, x, y);
      t.value = exact_log_marginal(st);
      t.fit = t.value;
      return t;
    }
    case Method::kSgpr:
    case Method::kSgprNew:
    case Method::kSgprArtemev: {
      const SparseModel<T> m(c.spec, c.noise_var, c.inducing, x, y, jitter_rel);
      const CollapsedVariant v = lay.method == Method::kSgpr      ? CollapsedVariant::kClassic
                                 : lay.method == Method::kSgprNew ? CollapsedVariant::kNew
                                                                  : CollapsedVariant::kSpherical;
      return collapsed_bound(m, build_cache(m), v);
    }
    case Method::kSvgp:
    case Method::kSvgpNew: {
      const SparseModel<T> m(c.spec, c.noise_var, c.inducing, x, y, jitter_rel);
      const double scale = batch.empty() ? 1.0
                                         : static_cast<double>(m.num_data()) /
                                               static_cast<double>(batch.size());
      const PenaltyVariant v =
          lay.method == Method::kSvgp ? PenaltyVariant::kClassic : PenaltyVariant::kNew;
      return svgp_terms(c.q, m, build_cache(m, batch), v, scale);
    }
    case Method::kSvgpPoisson:
    case Method::kSvgpPoissonNew: {
      // The Poisson likelihood has no noise; the model's noise slot is unused.
      const SparseModel<T> m(c.spec, T(1.0), c.inducing, x, y, jitter_rel);
      const double scale = batch.empty() ? 1.0
                                         : static_cast<double>(m.num_data()) /
                                               static_cast<double>(batch.size());
      const T v = lay.method == Method::kSvgpPoissonNew ? c.v : T(1.0);
      return poisson_terms(c.q, m, build_cache(m, batch), v, scale);
    }
  }
  throw InputError("unhandled method");
}

template <typename T>
T objective_value(const ParamLayout& lay, const Vec<T>& p, const MatrixXd& x, const VectorXd& y,
                  std::span<const Eigen::Index> batch, double jitter_rel) {
  return objective_terms(lay, p, x, y, batch, jitter_rel).value;
}

/// Gradient of the objective with respect to the q(u) mean and factor entries
/// only (all other coordinates zero), in closed form. Stochastic methods only.
VectorXd variational_gradient(const ParamLayout& lay, const VectorXd& p, const MatrixXd& x,
                              const VectorXd& y, std::span<const Eigen::Index> batch,
                              double jitter_rel);

/// Gradient used by the trainer. kForward combines dual-number passes over the
/// hyperparameters, inducing inputs and v with the closed-form q(u) part;
/// kFiniteDifference differentiates every coordinate numerically. Masked-out
/// coordinates get 0. The objective value at `p` is stored in `value`.
VectorXd objective_gradient(const ParamLayout& lay, const VectorXd& p, const MatrixXd& x,
                            const VectorXd& y, std::span<const Eigen::Index> batch,
                            double jitter_rel, GradientMethod method,
                            const std::vector<bool>* mask = nullptr, double* value = nullptr);

}  // namespace tsgp
