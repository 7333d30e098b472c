// NEON (AArch64) variants; two double lanes per register. Same algorithms and
// operation order as the AVX2 variants.

#include "tsgp/simd/dispatch.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace tsgp::simd::detail {
namespace {

constexpr std::size_t kLanes = 2;

inline float64x2_t exp_f64(float64x2_t x) {
  const float64x2_t kMax = vdupq_n_f64(709.782712893384);
  const float64x2_t kMin = vdupq_n_f64(-745.1332191019412);
  const uint64x2_t is_num = vceqq_f64(x, x);
  const uint64x2_t over = vcgtq_f64(x, kMax);
  const uint64x2_t under = vcltq_f64(x, kMin);
  float64x2_t xc = vminq_f64(vmaxq_f64(vbslq_f64(is_num, x, kMin), kMin), kMax);

  const float64x2_t n = vrndnq_f64(vmulq_f64(xc, vdupq_n_f64(1.4426950408889634)));
  float64x2_t r = vfmsq_f64(xc, n, vdupq_n_f64(6.93147180369123816490e-01));
  r = vfmsq_f64(r, n, vdupq_n_f64(1.90821492927058770002e-10));

  static constexpr double kCoef[] = {1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
                                     1.0 / 362880.0,    1.0 / 40320.0,    1.0 / 5040.0,
                                     1.0 / 720.0,       1.0 / 120.0,      1.0 / 24.0,
                                     1.0 / 6.0,         0.5,              1.0,
                                     1.0};
  float64x2_t p = vdupq_n_f64(1.0 / 6227020800.0);
  for (double c : kCoef) p = vfmaq_f64(vdupq_n_f64(c), p, r);

  const int64x2_t ni = vcvtq_s64_f64(n);
  const int64x2_t n1 = vshrq_n_s64(ni, 1);
  const int64x2_t n2 = vsubq_s64(ni, n1);
  const int64x2_t bias = vdupq_n_s64(1023);
  const float64x2_t s1 = vreinterpretq_f64_s64(vshlq_n_s64(vaddq_s64(n1, bias), 52));
  const float64x2_t s2 = vreinterpretq_f64_s64(vshlq_n_s64(vaddq_s64(n2, bias), 52));
  float64x2_t y = vmulq_f64(vmulq_f64(p, s1), s2);

  y = vbslq_f64(under, vdupq_n_f64(0.0), y);
  y = vbslq_f64(over, vdupq_n_f64(HUGE_VAL), y);
  y = vbslq_f64(is_num, y, x);
  return y;
}

template <typename Op>
void for_each_block(const double* in, double* out, std::size_t n, Op op) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, op(vld1q_f64(in + i)));
  if (i < n) {
    double buf[kLanes] = {0.0, 0.0};
    std::memcpy(buf, in + i, (n - i) * sizeof(double));
    vst1q_f64(buf, op(vld1q_f64(buf)));
    std::memcpy(out + i, buf, (n - i) * sizeof(double));
  }
}

void vexp(const double* x, double* out, std::size_t n) {
  for_each_block(x, out, n, [](float64x2_t v) { return exp_f64(v); });
}

void sq_exp_from_sq_dist(double amp, double* x, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(amp);
  const float64x2_t mhalf = vdupq_n_f64(-0.5);
  for_each_block(x, x, n,
                 [&](float64x2_t v) { return vmulq_f64(a, exp_f64(vmulq_f64(mhalf, v))); });
}

void matern32_from_sq_dist(double amp, double* x, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(amp);
  const float64x2_t three = vdupq_n_f64(3.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  for_each_block(x, x, n, [&](float64x2_t v) {
    const float64x2_t r = vsqrtq_f64(vmulq_f64(three, v));
    return vmulq_f64(vmulq_f64(a, vaddq_f64(one, r)), exp_f64(vnegq_f64(r)));
  });
}

void pairwise_sq_dist(const double* a, std::size_t na, const double* b, std::size_t nb,
                      std::size_t dim, double* out) {
  const std::size_t nblocks = (na + kLanes - 1) / kLanes;
  std::vector<double> packed(nblocks * dim * kLanes, 0.0);
  for (std::size_t blk = 0; blk < nblocks; ++blk)
    for (std::size_t k = 0; k < dim; ++k)
      for (std::size_t l = 0; l < kLanes; ++l) {
        const std::size_t i = blk * kLanes + l;
        if (i < na) packed[(blk * dim + k) * kLanes + l] = a[i + k * na];
      }

  std::vector<double> anorm(nblocks * kLanes);
  for (std::size_t blk = 0; blk < nblocks; ++blk) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      const float64x2_t v = vld1q_f64(&packed[(blk * dim + k) * kLanes]);
      acc = vfmaq_f64(acc, v, v);
    }
    vst1q_f64(&anorm[blk * kLanes], acc);
  }

  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t two = vdupq_n_f64(2.0);
  double buf[kLanes];
  for (std::size_t j = 0; j < nb; ++j) {
    double bn = 0.0;
    for (std::size_t k = 0; k < dim; ++k) bn = std::fma(b[j + k * nb], b[j + k * nb], bn);
    const float64x2_t bnv = vdupq_n_f64(bn);
    double* col = out + j * na;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
      float64x2_t dot = vdupq_n_f64(0.0);
      for (std::size_t k = 0; k < dim; ++k)
        dot = vfmaq_f64(dot, vld1q_f64(&packed[(blk * dim + k) * kLanes]),
                        vdupq_n_f64(b[j + k * nb]));
      const float64x2_t s = vaddq_f64(vld1q_f64(&anorm[blk * kLanes]), bnv);
      const float64x2_t d = vmaxq_f64(zero, vfmsq_f64(s, two, dot));
      const std::size_t i0 = blk * kLanes;
      if (i0 + kLanes <= na) {
        vst1q_f64(col + i0, d);
      } else {
        vst1q_f64(buf, d);
        for (std::size_t l = 0; i0 + l < na; ++l) col[i0 + l] = buf[l];
      }
    }
  }
}

void col_sq_norms(const double* a, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* c = a + j * rows;
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kLanes <= rows; i += kLanes) {
      const float64x2_t v = vld1q_f64(c + i);
      acc = vfmaq_f64(acc, v, v);
    }
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < rows; ++i) s = std::fma(c[i], c[i], s);
    out[j] = s;
  }
}

}  // namespace

const KernelOps* neon_ops() {
  static const KernelOps k{pairwise_sq_dist, sq_exp_from_sq_dist, matern32_from_sq_dist,
                           col_sq_norms, vexp};
  return &k;
}

}  // namespace tsgp::simd::detail

#else

namespace tsgp::simd::detail {
const KernelOps* neon_ops() { return nullptr; }
}  // namespace tsgp::simd::detail

#endif
