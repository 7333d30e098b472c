#pragma once

// Random instance generators and dense brute-force oracles shared by the test
// suites. Oracles deliberately avoid the library's code paths: kernels are
// evaluated pair by pair from the closed-form formulas, determinants and
// solves go through LU rather than Cholesky, and nothing uses the Nystrom
// cache or the Woodbury identities.

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tsgp/kernels.hpp"
#include "tsgp/types.hpp"

namespace tsgp::testing {

using Rng = std::mt19937_64;

inline MatrixXd uniform_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = u(rng);
  return m;
}

inline VectorXd normal_vector(Rng& rng, Eigen::Index n, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline MatrixXd normal_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

// W^T W + I
inline MatrixXd random_spd(Rng& rng, Eigen::Index n) {
  const MatrixXd w = normal_matrix(rng, n, n);
  return w.transpose() * w + MatrixXd::Identity(n, n);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Kernel value from the textbook formula for a single pair of points.
inline double naive_kernel(const KernelSpec<double>& s, const VectorXd& a, const VectorXd& b) {
  double d2 = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double l = s.family == KernelFamily::kSqExpArd ? s.lengthscales[k] : s.lengthscales[0];
    d2 += (a[k] - b[k]) * (a[k] - b[k]) / (l * l);
  }
  if (s.family == KernelFamily::kMatern32) {
    const double r = std::sqrt(d2);
    return s.amplitude_sq * (1.0 + std::sqrt(3.0) * r) * std::exp(-std::sqrt(3.0) * r);
  }
  return s.amplitude_sq * std::exp(-0.5 * d2);
}

inline MatrixXd naive_cov(const KernelSpec<double>& s, const MatrixXd& a, const MatrixXd& b) {
  MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = naive_kernel(s, a.row(i).transpose(), b.row(j).transpose());
  return k;
}

inline double lu_logdet(const MatrixXd& a) {
  const Eigen::PartialPivLU<MatrixXd> lu(a);
  const MatrixXd& u = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) s += std::log(std::abs(u(i, i)));
  return s;
}

inline MatrixXd lu_inverse(const MatrixXd& a) { return a.fullPivLu().inverse(); }

inline double dense_mvn_logpdf(const VectorXd& y, const VectorXd& mean, const MatrixXd& cov) {
  const VectorXd d = y - mean;
  const double quad = d.dot(cov.fullPivLu().solve(d));
  return -0.5 * quad - 0.5 * lu_logdet(cov) - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

// KL[N(m0, s0) || N(m1, s1)]
inline double dense_gauss_kl(const VectorXd& m0, const MatrixXd& s0, const VectorXd& m1,
                             const MatrixXd& s1) {
  const MatrixXd s1i = lu_inverse(s1);
  const VectorXd d = m1 - m0;
  return 0.5 * ((s1i * s0).trace() + d.dot(s1i * d) - static_cast<double>(m0.size()) +
                lu_logdet(s1) - lu_logdet(s0));
}

inline MatrixXd sym_sqrt(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  const VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Kuu with the same absolute jitter the library applies by default.
inline MatrixXd jittered_kuu(const KernelSpec<double>& s, const MatrixXd& z, double jitter_rel) {
  MatrixXd kuu = naive_cov(s, z, z);
  kuu.diagonal().array() += jitter_rel * kuu.diagonal().mean();
  return kuu;
}

inline MatrixXd dense_qff(const KernelSpec<double>& s, const MatrixXd& x, const MatrixXd& z,
                          double jitter_rel) {
  const MatrixXd kfu = naive_cov(s, x, z);
  return kfu * lu_inverse(jittered_kuu(s, z, jitter_rel)) * kfu.transpose();
}

inline KernelSpec<double> random_spec(Rng& rng, KernelFamily family, Eigen::Index dim) {
  KernelSpec<double> s;
  s.family = family;
  s.amplitude_sq = uniform(rng, 0.3, 2.0);
  s.lengthscales = VectorXd(family == KernelFamily::kSqExpArd ? dim : 1);
  for (Eigen::Index k = 0; k < s.lengthscales.size(); ++k) s.lengthscales[k] = uniform(rng, 0.4, 2.0);
  return s;
}

struct RegressionInstance {
  KernelSpec<double> spec;
  double noise = 0.1;
  MatrixXd x;
  VectorXd y;
  MatrixXd z;
};

// Random regression problem; targets are drawn from the model's own prior so
// the bounds are evaluated in a realistic regime.
inline RegressionInstance random_instance(Rng& rng, Eigen::Index n, Eigen::Index m, Eigen::Index dim,
                                          KernelFamily family = KernelFamily::kSqExp) {
  RegressionInstance r;
  r.spec = random_spec(rng, family, dim);
  r.noise = uniform(rng, 0.02, 1.0);
  r.x = uniform_matrix(rng, n, dim, -3, 3);
  MatrixXd k = naive_cov(r.spec, r.x, r.x);
  k.diagonal().array() += r.noise;
  const MatrixXd l = Eigen::LLT<MatrixXd>(k).matrixL();
  r.y = l * normal_vector(rng, n);
  r.z = uniform_matrix(rng, m, dim, -3, 3);
  return r;
}

}  // namespace tsgp::testing
