#pragma once

#include <string>

#include "tsgp/kernels.hpp"
#include "tsgp/linalg.hpp"

namespace tsgp {

inline constexpr Eigen::Index kExactGpMaxN = 20000;

// Exact GP regression state: the factor of K_ff + noise I and
// alpha = (K_ff + noise I)^{-1} y are computed once at construction.
template <typename T>
struct ExactGpState {
  KernelSpec<T> spec;
  T noise_var;
  MatrixXd inputs;
  VectorXd targets;
  SpdFactor<T> factor;
  Vec<T> alpha;

  ExactGpState(KernelSpec<T> spec_in, T noise, MatrixXd x, VectorXd y)
      : spec(std::move(spec_in)), noise_var(noise), inputs(std::move(x)), targets(std::move(y)) {
    require_dims(inputs.rows() == targets.size(), "exact GP: inputs/targets row count differ");
    if (inputs.rows() > kExactGpMaxN)
      throw ProblemTooLarge("exact GP refuses N=" + std::to_string(inputs.rows()) + " > " +
                            std::to_string(kExactGpMaxN));
    if (!(value_of(noise_var) > 0.0)) throw InputError("exact GP: noise variance must be > 0");
    Mat<T> k = cross_cov(spec, inputs, inputs);
    k.diagonal().array() += noise_var;
    factor = cholesky(k, 0.0);
    alpha = cholesky_solve(factor, targets.template cast<T>());
  }
};

/// -1/2 y^T alpha - 1/2 log|K_ff + noise I| - N/2 log 2 pi
template <typename T>
T exact_log_marginal(const ExactGpState<T>& s) {
  const auto n = static_cast<double>(s.targets.size());
  const T fit = s.targets.template cast<T>().dot(s.alpha);
  return T(-0.5) * fit - T(0.5) * logdet(s.factor) - T(0.5 * n * kLog2Pi);
}

/// Posterior over latent values at `xstar`; `observation_noise` adds noise I to
/// the covariance for the predictive distribution of new targets.
GaussianPrediction exact_predict(const ExactGpState<double>& s, const MatrixXd& xstar,
                                 bool observation_noise = false);

}  // namespace tsgp
