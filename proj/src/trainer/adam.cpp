#include "tsgp/trainer/adam.hpp"

#include <cmath>

#include "tsgp/error.hpp"

namespace tsgp {

void adam_step(AdamState& s, VectorXd& params, const VectorXd& grad) {
  require_dims(s.m.size() == params.size() && s.v.size() == params.size() &&
                   grad.size() == params.size(),
               "adam: state, parameter and gradient lengths differ");
  ++s.step;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    params[i] += s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace tsgp
