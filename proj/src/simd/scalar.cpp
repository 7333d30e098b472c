#include <algorithm>
#include <cmath>
#include <vector>

#include "tsgp/simd/dispatch.hpp"

namespace tsgp::simd::detail {
namespace {

void pairwise_sq_dist(const double* a, std::size_t na, const double* b, std::size_t nb,
                      std::size_t dim, double* out) {
  std::vector<double> an(na, 0.0);
  for (std::size_t k = 0; k < dim; ++k)
    for (std::size_t i = 0; i < na; ++i) an[i] += a[i + k * na] * a[i + k * na];

  for (std::size_t j = 0; j < nb; ++j) {
    double bn = 0.0;
    for (std::size_t k = 0; k < dim; ++k) bn += b[j + k * nb] * b[j + k * nb];
    double* col = out + j * na;
    for (std::size_t i = 0; i < na; ++i) col[i] = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double bk = b[j + k * nb];
      const double* ak = a + k * na;
      for (std::size_t i = 0; i < na; ++i) col[i] += ak[i] * bk;
    }
    for (std::size_t i = 0; i < na; ++i) col[i] = std::max(0.0, (an[i] + bn) - 2.0 * col[i]);
  }
}

void sq_exp_from_sq_dist(double amp, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::exp(-0.5 * x[i]);
}

void matern32_from_sq_dist(double amp, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::sqrt(3.0 * x[i]);
    x[i] = amp * (1.0 + r) * std::exp(-r);
  }
}

void col_sq_norms(const double* a, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* c = a + j * rows;
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += c[i] * c[i];
    out[j] = s;
  }
}

void vexp(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

}  // namespace

const KernelOps& scalar_ops() {
  static const KernelOps k{pairwise_sq_dist, sq_exp_from_sq_dist, matern32_from_sq_dist,
                           col_sq_norms, vexp};
  return k;
}

}  // namespace tsgp::simd::detail
