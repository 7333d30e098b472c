#pragma once

#include <functional>

#include "tsgp/types.hpp"

namespace tsgp {

// Nodes x_k and weights w_k with sum_k w_k g(x_k) ~ integral exp(-x^2) g(x) dx.
struct GaussHermiteRule {
  VectorXd nodes;
  VectorXd weights;
};

/// Golub-Welsch construction; rules are cached per order.
const GaussHermiteRule& gauss_hermite(int order);

/// E_{N(f | mean, var)}[g(f)] with an `order`-point Gauss-Hermite rule.
double gaussian_expectation(const std::function<double(double)>& g, double mean, double var,
                            int order = 20);

/// log E_{N(f | mean, var)}[exp(log_g(f))], evaluated with log-sum-exp.
double log_gaussian_expectation(const std::function<double(double)>& log_g, double mean, double var,
                                int order = 20);

}  // namespace tsgp
