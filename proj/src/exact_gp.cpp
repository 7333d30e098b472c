#include "tsgp/exact_gp.hpp"

namespace tsgp {

GaussianPrediction exact_predict(const ExactGpState<double>& s, const MatrixXd& xstar,
                                 bool observation_noise) {
  require_dims(xstar.cols() == s.inputs.cols(), "exact_predict: test inputs have dimension " +
                                                    std::to_string(xstar.cols()) + ", expected " +
                                                    std::to_string(s.inputs.cols()));
  const MatrixXd ksf = cross_cov(s.spec, xstar, s.inputs);
  GaussianPrediction p;
  p.mean = ksf * s.alpha;
  const MatrixXd v = solve_triangular(s.factor, ksf.transpose());
  p.cov = cross_cov(s.spec, xstar, xstar) - v.transpose() * v;
  p.cov = 0.5 * (p.cov + p.cov.transpose());
  if (observation_noise) p.cov.diagonal().array() += s.noise_var;
  return p;
}

}  // namespace tsgp
