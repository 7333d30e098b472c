#pragma once

#include <vector>

#include "tsgp/data.hpp"
#include "tsgp/trainer/fit.hpp"

namespace tsgp {

struct Metrics {
  Eigen::Index n = 0;
  double mean_log_lik = 0.0;
  double rmse = 0.0;
  std::vector<double> log_lik;  // per test point, original target scale
};

/// Test log predictive density and RMSE of `fit` on `test`, in the original
/// (denormalized) target scale. Test inputs are shifted with the training
/// normalization stored in `fit`, whatever normalization `test` carries.
/// Gaussian methods use the predictive N(mean, var + noise); Poisson methods
/// the Poisson probability integrated over q(f*) by quadrature, with the
/// predictive mean intensity as point prediction.
Metrics evaluate(const FitResult& fit, const Dataset& test);

/// Gaussian metrics from predictive means and variances (observation noise
/// already included) against targets.
Metrics gaussian_metrics(const VectorXd& mean, const VectorXd& var, const VectorXd& y);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
  int n = 0;
};

MeanSe mean_se(const std::vector<double>& values);

}  // namespace tsgp
