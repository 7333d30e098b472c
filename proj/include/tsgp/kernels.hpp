#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>

#include "tsgp/error.hpp"
#include "tsgp/simd/dispatch.hpp"
#include "tsgp/types.hpp"

namespace tsgp {

enum class KernelFamily {
  kSqExp,     // isotropic squared exponential, one shared lengthscale
  kSqExpArd,  // squared exponential, one lengthscale per input dimension
  kMatern32,  // Matern-3/2, one shared lengthscale
};

std::string_view to_string(KernelFamily f);
KernelFamily parse_kernel_family(std::string_view s);

template <typename T>
struct KernelSpec {
  KernelFamily family = KernelFamily::kSqExp;
  T amplitude_sq = T(1.0);
  Vec<T> lengthscales = Vec<T>::Ones(1);

  // Lengthscale applied to input dimension `dim`.
  const T& lengthscale(Eigen::Index dim) const {
    return family == KernelFamily::kSqExpArd ? lengthscales[dim] : lengthscales[0];
  }

  void check_dim(Eigen::Index d) const {
    if (family == KernelFamily::kSqExpArd) {
      require_dims(lengthscales.size() == d, "ARD kernel needs " + std::to_string(d) +
                                                 " lengthscales, got " +
                                                 std::to_string(lengthscales.size()));
    } else {
      require_dims(lengthscales.size() == 1, "shared-lengthscale kernel needs exactly one lengthscale");
    }
  }

  template <typename U>
  KernelSpec<U> cast() const {
    return {family, U(amplitude_sq), lengthscales.template cast<U>()};
  }
};

namespace detail {

template <typename T, typename Derived>
Mat<T> scale_inputs(const KernelSpec<T>& spec, const Eigen::MatrixBase<Derived>& a) {
  Mat<T> s = a.template cast<T>();
  for (Eigen::Index k = 0; k < s.cols(); ++k) s.col(k) /= spec.lengthscale(k);
  return s;
}

template <typename T>
Mat<T> sq_dist_generic(const Mat<T>& a, const Mat<T>& b) {
  const Vec<T> an = a.rowwise().squaredNorm();
  const Vec<T> bn = b.rowwise().squaredNorm();
  Mat<T> d = a * b.transpose();
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      const T v = (an[i] + bn[j]) - T(2.0) * d(i, j);
      d(i, j) = value_of(v) > 0.0 ? v : T(0.0);
    }
  return d;
}

}  // namespace detail

/// K(A, B) for row-wise point sets A (N x d) and B (M x d).
///
/// Squared distances use the expanded form |a|^2 + |b|^2 - 2 a.b clamped at 0.
/// The double-precision path runs through the SIMD dispatch layer; other scalar
/// types (dual numbers) use the generic Eigen path.
template <typename T, typename DA, typename DB>
Mat<T> cross_cov(const KernelSpec<T>& spec, const Eigen::MatrixBase<DA>& a,
                 const Eigen::MatrixBase<DB>& b) {
  require_dims(a.cols() == b.cols(), "cross_cov: input dimensions differ (" +
                                         std::to_string(a.cols()) + " vs " +
                                         std::to_string(b.cols()) + ")");
  spec.check_dim(a.cols());
  const Mat<T> as = detail::scale_inputs(spec, a);
  const Mat<T> bs = detail::scale_inputs(spec, b);

  if constexpr (std::is_same_v<T, double>) {
    Mat<double> k(as.rows(), bs.rows());
    if (k.size() == 0) return k;
    const auto& ops = simd::active_ops();
    ops.pairwise_sq_dist(as.data(), static_cast<std::size_t>(as.rows()), bs.data(),
                         static_cast<std::size_t>(bs.rows()), static_cast<std::size_t>(as.cols()),
                         k.data());
    if (spec.family == KernelFamily::kMatern32)
      ops.matern32_from_sq_dist(spec.amplitude_sq, k.data(), static_cast<std::size_t>(k.size()));
    else
      ops.sq_exp_from_sq_dist(spec.amplitude_sq, k.data(), static_cast<std::size_t>(k.size()));
    return k;
  } else {
    using std::exp;
    using std::sqrt;
    Mat<T> k = detail::sq_dist_generic(as, bs);
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      for (Eigen::Index i = 0; i < k.rows(); ++i) {
        if (spec.family == KernelFamily::kMatern32) {
          const T r = sqrt(T(3.0) * k(i, j));
          k(i, j) = spec.amplitude_sq * (T(1.0) + r) * exp(-r);
        } else {
          k(i, j) = spec.amplitude_sq * exp(T(-0.5) * k(i, j));
        }
      }
    return k;
  }
}

/// k(a_i, a_i) for every row; every supported family is stationary, so this is
/// the amplitude repeated.
template <typename T, typename DA>
Vec<T> diag_cov(const KernelSpec<T>& spec, const Eigen::MatrixBase<DA>& a) {
  spec.check_dim(a.cols());
  return Vec<T>::Constant(a.rows(), spec.amplitude_sq);
}

}  // namespace tsgp
