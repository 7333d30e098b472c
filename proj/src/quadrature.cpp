#include "tsgp/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "tsgp/error.hpp"

namespace tsgp {

const GaussHermiteRule& gauss_hermite(int order) {
  if (order < 1) throw InputError("Gauss-Hermite order must be >= 1");
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(order); it != cache.end()) return it->second;

  // Symmetric tridiagonal Jacobi matrix of the (physicists') Hermite recurrence.
  MatrixXd jac = MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(jac);
  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = std::sqrt(std::numbers::pi) * es.eigenvectors().row(0).transpose().array().square();
  return cache.emplace(order, std::move(rule)).first->second;
}

double gaussian_expectation(const std::function<double(double)>& g, double mean, double var,
                            int order) {
  const GaussHermiteRule& r = gauss_hermite(order);
  const double scale = std::sqrt(2.0 * std::max(var, 0.0));
  double s = 0.0;
  for (int k = 0; k < order; ++k) s += r.weights[k] * g(mean + scale * r.nodes[k]);
  return s / std::sqrt(std::numbers::pi);
}

double log_gaussian_expectation(const std::function<double(double)>& log_g, double mean, double var,
                                int order) {
  const GaussHermiteRule& r = gauss_hermite(order);
  const double scale = std::sqrt(2.0 * std::max(var, 0.0));
  VectorXd terms(order);
  for (int k = 0; k < order; ++k)
    terms[k] = std::log(r.weights[k]) + log_g(mean + scale * r.nodes[k]);
  const double mx = terms.maxCoeff();
  return mx + std::log((terms.array() - mx).exp().sum()) - 0.5 * std::log(std::numbers::pi);
}

}  // namespace tsgp
