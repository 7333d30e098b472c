#pragma once

#include "tsgp/types.hpp"

namespace tsgp {

// Adam for maximization: each step moves the parameters along +gradient.
struct AdamState {
  VectorXd m;
  VectorXd v;
  long step = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(Eigen::Index n, double learning_rate = 0.01)
      : m(VectorXd::Zero(n)), v(VectorXd::Zero(n)), lr(learning_rate) {}
};

/// One ascent step in place. Throws DimensionMismatch if the lengths differ.
void adam_step(AdamState& state, VectorXd& params, const VectorXd& grad);

}  // namespace tsgp
