#pragma once

// Data-parallel inner loops behind the kernel and Nystrom computations.
//
// Every routine has a portable scalar reference implementation and vector
// variants (AVX2+FMA on x86-64, NEON on AArch64). The active variant is chosen
// once at startup from CPU feature detection and can be pinned with the
// TSGP_SIMD environment variable (scalar | avx2 | neon) or set_active().
//
// All buffers are column-major. Each output element is produced by the same
// sequence of operations regardless of its position, so symmetric inputs give
// exactly symmetric outputs within one variant.

#include <cstddef>

namespace tsgp::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelOps {
  // out(i, j) = max(0, |a_i|^2 + |b_j|^2 - 2 a_i.b_j); a is na x dim, b is nb x dim.
  void (*pairwise_sq_dist)(const double* a, std::size_t na, const double* b, std::size_t nb,
                           std::size_t dim, double* out);
  // x <- amp * exp(-x / 2)
  void (*sq_exp_from_sq_dist)(double amp, double* x, std::size_t n);
  // x <- amp * (1 + r) exp(-r), r = sqrt(3 x)
  void (*matern32_from_sq_dist)(double amp, double* x, std::size_t n);
  // out[j] = sum_i a(i, j)^2 for an rows x cols matrix.
  void (*col_sq_norms)(const double* a, std::size_t rows, std::size_t cols, double* out);
  // out[i] = exp(x[i])
  void (*exp)(const double* x, double* out, std::size_t n);
};

bool available(Isa isa);
const KernelOps& ops(Isa isa);

Isa active();
const KernelOps& active_ops();
// Throws std::invalid_argument if the requested variant is not available here.
void set_active(Isa isa);

const char* name(Isa isa);

namespace detail {
const KernelOps& scalar_ops();
const KernelOps* avx2_ops();  // nullptr when not compiled in
const KernelOps* neon_ops();
}  // namespace detail

}  // namespace tsgp::simd
