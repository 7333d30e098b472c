#pragma once

// Forward-mode dual number carrying K directional derivatives at once.
// Every bound in the library is templated on its scalar type; evaluating it on
// Dual<K> with K seeded unit directions yields K partial derivatives exactly
// (to rounding) in a single pass.

#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Core>

#include "tsgp/types.hpp"

namespace tsgp {

template <int K>
struct Dual {
  double v = 0.0;
  std::array<double, K> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit promotion of constants

  static Dual variable(double value, int direction) {
    Dual x(value);
    x.d[direction] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int k = 0; k < K; ++k) d[k] += o.d[k];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int k = 0; k < K; ++k) d[k] -= o.d[k];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int k = 0; k < K; ++k) d[k] = d[k] * o.v + v * o.d[k];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    const double q = v * inv;
    for (int k = 0; k < K; ++k) d[k] = (d[k] - q * o.d[k]) * inv;
    v = q;
    return *this;
  }
};

template <int K>
Dual<K> operator-(Dual<K> a) {
  a.v = -a.v;
  for (auto& x : a.d) x = -x;
  return a;
}
template <int K>
Dual<K> operator+(const Dual<K>& a) {
  return a;
}
template <int K>
Dual<K> operator+(Dual<K> a, const Dual<K>& b) {
  return a += b;
}
template <int K>
Dual<K> operator-(Dual<K> a, const Dual<K>& b) {
  return a -= b;
}
template <int K>
Dual<K> operator*(Dual<K> a, const Dual<K>& b) {
  return a *= b;
}
template <int K>
Dual<K> operator/(Dual<K> a, const Dual<K>& b) {
  return a /= b;
}
template <int K>
Dual<K> operator+(Dual<K> a, double b) {
  a.v += b;
  return a;
}
template <int K>
Dual<K> operator+(double b, Dual<K> a) {
  a.v += b;
  return a;
}
template <int K>
Dual<K> operator-(Dual<K> a, double b) {
  a.v -= b;
  return a;
}
template <int K>
Dual<K> operator-(double b, const Dual<K>& a) {
  return Dual<K>(b) - a;
}
template <int K>
Dual<K> operator*(Dual<K> a, double b) {
  a.v *= b;
  for (auto& x : a.d) x *= b;
  return a;
}
template <int K>
Dual<K> operator*(double b, Dual<K> a) {
  return a * b;
}
template <int K>
Dual<K> operator/(Dual<K> a, double b) {
  return a * (1.0 / b);
}
template <int K>
Dual<K> operator/(double b, const Dual<K>& a) {
  return Dual<K>(b) / a;
}

template <int K>
bool operator<(const Dual<K>& a, const Dual<K>& b) {
  return a.v < b.v;
}
template <int K>
bool operator>(const Dual<K>& a, const Dual<K>& b) {
  return a.v > b.v;
}
template <int K>
bool operator<=(const Dual<K>& a, const Dual<K>& b) {
  return a.v <= b.v;
}
template <int K>
bool operator>=(const Dual<K>& a, const Dual<K>& b) {
  return a.v >= b.v;
}
template <int K>
bool operator==(const Dual<K>& a, const Dual<K>& b) {
  return a.v == b.v;
}
template <int K>
bool operator!=(const Dual<K>& a, const Dual<K>& b) {
  return a.v != b.v;
}

namespace detail {
template <int K>
Dual<K> chain(const Dual<K>& a, double fv, double dfdv) {
  Dual<K> r(fv);
  for (int k = 0; k < K; ++k) r.d[k] = dfdv * a.d[k];
  return r;
}
}  // namespace detail

template <int K>
Dual<K> exp(const Dual<K>& a) {
  const double e = std::exp(a.v);
  return detail::chain(a, e, e);
}
template <int K>
Dual<K> log(const Dual<K>& a) {
  return detail::chain(a, std::log(a.v), 1.0 / a.v);
}
template <int K>
Dual<K> log1p(const Dual<K>& a) {
  return detail::chain(a, std::log1p(a.v), 1.0 / (1.0 + a.v));
}
template <int K>
Dual<K> expm1(const Dual<K>& a) {
  return detail::chain(a, std::expm1(a.v), std::exp(a.v));
}
template <int K>
Dual<K> sqrt(const Dual<K>& a) {
  const double s = std::sqrt(a.v);
  return detail::chain(a, s, s > 0.0 ? 0.5 / s : 0.0);
}
template <int K>
Dual<K> abs(const Dual<K>& a) {
  return a.v < 0.0 ? -a : a;
}
template <int K>
Dual<K> abs2(const Dual<K>& a) {
  return a * a;
}
template <int K>
Dual<K> conj(const Dual<K>& a) {
  return a;
}
template <int K>
Dual<K> real(const Dual<K>& a) {
  return a;
}
template <int K>
Dual<K> imag(const Dual<K>&) {
  return Dual<K>(0.0);
}
template <int K>
bool isfinite(const Dual<K>& a) {
  return std::isfinite(a.v);
}
template <int K>
bool isnan(const Dual<K>& a) {
  return std::isnan(a.v);
}
template <int K>
bool isinf(const Dual<K>& a) {
  return std::isinf(a.v);
}
template <int K>
Dual<K> max(const Dual<K>& a, const Dual<K>& b) {
  return a.v >= b.v ? a : b;
}
template <int K>
Dual<K> min(const Dual<K>& a, const Dual<K>& b) {
  return a.v <= b.v ? a : b;
}

template <int K>
double value_of(const Dual<K>& x) {
  return x.v;
}

template <int K>
std::ostream& operator<<(std::ostream& os, const Dual<K>& x) {
  return os << x.v;
}

}  // namespace tsgp

namespace Eigen {

template <int K>
struct NumTraits<tsgp::Dual<K>> : GenericNumTraits<double> {
  using Real = tsgp::Dual<K>;
  using NonInteger = tsgp::Dual<K>;
  using Nested = tsgp::Dual<K>;
  using Literal = tsgp::Dual<K>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = K + 1,
    MulCost = 2 * K + 1
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline Real highest() { return Real(std::numeric_limits<double>::max()); }
  static inline Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

template <int K, typename BinaryOp>
struct ScalarBinaryOpTraits<tsgp::Dual<K>, double, BinaryOp> {
  using ReturnType = tsgp::Dual<K>;
};
template <int K, typename BinaryOp>
struct ScalarBinaryOpTraits<double, tsgp::Dual<K>, BinaryOp> {
  using ReturnType = tsgp::Dual<K>;
};

}  // namespace Eigen
