// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// is only entered after a runtime CPUID check.

#include "tsgp/simd/dispatch.hpp"

#if defined(TSGP_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace tsgp::simd::detail {
namespace {

constexpr std::size_t kLanes = 4;

// exp(x) = 2^n * p(r), x = n ln2 + r, |r| <= ln2 / 2. Degree-13 Taylor
// polynomial in Horner form; 2^n applied as two exponent-field products so
// that results down to the subnormal range are formed correctly.
inline __m256d exp_pd(__m256d x) {
  const __m256d kMax = _mm256_set1_pd(709.782712893384);
  const __m256d kMin = _mm256_set1_pd(-745.1332191019412);
  const __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  const __m256d over = _mm256_cmp_pd(x, kMax, _CMP_GT_OQ);
  const __m256d under = _mm256_cmp_pd(x, kMin, _CMP_LT_OQ);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, kMin), kMax);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), xc);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i n1 = _mm_srai_epi32(ni, 1);
  const __m128i n2 = _mm_sub_epi32(ni, n1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256d s1 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n1), bias), 52));
  const __m256d s2 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n2), bias), 52));
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(p, s1), s2);

  y = _mm256_blendv_pd(y, _mm256_setzero_pd(), under);
  y = _mm256_blendv_pd(y, _mm256_set1_pd(HUGE_VAL), over);
  y = _mm256_blendv_pd(y, x, nan_mask);
  return y;
}

// Applies `op` to every element; the tail is staged through a padded block so
// it goes through exactly the same vector instructions as the body.
template <typename Op>
void for_each_block(const double* in, double* out, std::size_t n, Op op) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) _mm256_storeu_pd(out + i, op(_mm256_loadu_pd(in + i)));
  if (i < n) {
    alignas(32) double buf[kLanes] = {0.0, 0.0, 0.0, 0.0};
    std::memcpy(buf, in + i, (n - i) * sizeof(double));
    _mm256_store_pd(buf, op(_mm256_load_pd(buf)));
    std::memcpy(out + i, buf, (n - i) * sizeof(double));
  }
}

void vexp(const double* x, double* out, std::size_t n) {
  for_each_block(x, out, n, [](__m256d v) { return exp_pd(v); });
}

void sq_exp_from_sq_dist(double amp, double* x, std::size_t n) {
  const __m256d a = _mm256_set1_pd(amp);
  const __m256d mhalf = _mm256_set1_pd(-0.5);
  for_each_block(x, x, n,
                 [&](__m256d v) { return _mm256_mul_pd(a, exp_pd(_mm256_mul_pd(mhalf, v))); });
}

void matern32_from_sq_dist(double amp, double* x, std::size_t n) {
  const __m256d a = _mm256_set1_pd(amp);
  const __m256d three = _mm256_set1_pd(3.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  for_each_block(x, x, n, [&](__m256d v) {
    const __m256d r = _mm256_sqrt_pd(_mm256_mul_pd(three, v));
    return _mm256_mul_pd(_mm256_mul_pd(a, _mm256_add_pd(one, r)),
                         exp_pd(_mm256_sub_pd(zero, r)));
  });
}

void pairwise_sq_dist(const double* a, std::size_t na, const double* b, std::size_t nb,
                      std::size_t dim, double* out) {
  // Stage a in row blocks of four, zero padded, laid out block-major so every
  // block (including the tail) is read with aligned full-width loads.
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
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) {
      const __m256d v = _mm256_loadu_pd(&packed[(blk * dim + k) * kLanes]);
      acc = _mm256_fmadd_pd(v, v, acc);
    }
    _mm256_storeu_pd(&anorm[blk * kLanes], acc);
  }

  const __m256d zero = _mm256_setzero_pd();
  const __m256d two = _mm256_set1_pd(2.0);
  alignas(32) double buf[kLanes];
  for (std::size_t j = 0; j < nb; ++j) {
    double bn = 0.0;
    for (std::size_t k = 0; k < dim; ++k) bn = std::fma(b[j + k * nb], b[j + k * nb], bn);
    const __m256d bnv = _mm256_set1_pd(bn);
    double* col = out + j * na;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
      __m256d dot = _mm256_setzero_pd();
      for (std::size_t k = 0; k < dim; ++k) {
        const __m256d av = _mm256_loadu_pd(&packed[(blk * dim + k) * kLanes]);
        dot = _mm256_fmadd_pd(av, _mm256_set1_pd(b[j + k * nb]), dot);
      }
      const __m256d s = _mm256_add_pd(_mm256_loadu_pd(&anorm[blk * kLanes]), bnv);
      const __m256d d = _mm256_max_pd(zero, _mm256_fnmadd_pd(two, dot, s));
      const std::size_t i0 = blk * kLanes;
      if (i0 + kLanes <= na) {
        _mm256_storeu_pd(col + i0, d);
      } else {
        _mm256_store_pd(buf, d);
        for (std::size_t l = 0; i0 + l < na; ++l) col[i0 + l] = buf[l];
      }
    }
  }
}

void col_sq_norms(const double* a, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* c = a + j * rows;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= rows; i += kLanes) {
      const __m256d v = _mm256_loadu_pd(c + i);
      acc = _mm256_fmadd_pd(v, v, acc);
    }
    alignas(32) double lanes[kLanes];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < rows; ++i) s = std::fma(c[i], c[i], s);
    out[j] = s;
  }
}

}  // namespace

const KernelOps* avx2_ops() {
  static const KernelOps k{pairwise_sq_dist, sq_exp_from_sq_dist, matern32_from_sq_dist,
                           col_sq_norms, vexp};
  return &k;
}

}  // namespace tsgp::simd::detail

#else

namespace tsgp::simd::detail {
const KernelOps* avx2_ops() { return nullptr; }
}  // namespace tsgp::simd::detail

#endif
