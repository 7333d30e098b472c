#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tsgp/kernels.hpp"
#include "tsgp/variational.hpp"

namespace tsgp {

enum class Method {
  kExact,
  kSgpr,
  kSgprNew,
  kSgprArtemev,
  kSvgp,
  kSvgpNew,
  kSvgpPoisson,
  kSvgpPoissonNew,
};

std::string to_string(Method m);
Method parse_method(const std::string& s);

inline bool is_collapsed(Method m) {
  return m == Method::kSgpr || m == Method::kSgprNew || m == Method::kSgprArtemev;
}
inline bool is_poisson(Method m) {
  return m == Method::kSvgpPoisson || m == Method::kSvgpPoissonNew;
}
inline bool is_stochastic(Method m) {
  return m == Method::kSvgp || m == Method::kSvgpNew || is_poisson(m);
}

// Smallest noise standard deviation reachable through the transform.
inline constexpr double kNoiseSdFloor = 1e-3;

/// log(1 + exp(x)) without overflow.
template <typename T>
T softplus(const T& x) {
  using std::exp;
  using std::log1p;
  if (value_of(x) > 0.0) return x + log1p(exp(-x));
  return log1p(exp(x));
}

/// Inverse of softplus for y > 0.
inline double inv_softplus(double y) {
  if (!(y > 0.0)) throw InputError("softplus inverse needs a positive value");
  return y + std::log(-std::expm1(-y));
}

/// Where each block of the flat unconstrained vector lives. A block with
/// length zero is absent for the method.
struct ParamLayout {
  Method method = Method::kSgprNew;
  KernelFamily family = KernelFamily::kSqExp;
  Eigen::Index dim = 1;
  Eigen::Index num_inducing = 0;
  bool whitened = true;

  Eigen::Index noise = -1;
  Eigen::Index amplitude = -1;
  Eigen::Index lengthscale = -1;
  Eigen::Index num_lengthscales = 0;
  Eigen::Index inducing = -1;  // M * d entries, column-major
  Eigen::Index q_mean = -1;
  Eigen::Index q_factor = -1;  // M (M + 1) / 2 entries, lower triangle column by column
  Eigen::Index v = -1;
  Eigen::Index total = 0;

  static ParamLayout make(Method method, KernelFamily family, Eigen::Index dim, Eigen::Index m,
                          bool whitened = true);

  bool has_noise() const { return noise >= 0; }
  bool has_inducing() const { return inducing >= 0; }
  bool has_q() const { return q_mean >= 0; }
  bool has_v() const { return v >= 0; }

  /// Human-readable name of coordinate i, e.g. "lengthscale[0]" or "z[3,0]".
  std::string name(Eigen::Index i) const;

  /// Indices belonging to the named group: noise, amplitude, lengthscale,
  /// inducing, q, v.
  std::vector<Eigen::Index> group(const std::string& g) const;
};

/// Model quantities in constrained space.
template <typename T>
struct Constrained {
  KernelSpec<T> spec;
  T noise_var = T(1.0);
  Mat<T> inducing;
  GaussianVariational<T> q;
  T v = T(1.0);
};

template <typename T>
Constrained<T> constrain(const ParamLayout& lay, const Vec<T>& p) {
  require_dims(p.size() == lay.total, "parameter vector has " + std::to_string(p.size()) +
                                          " entries, layout expects " + std::to_string(lay.total));
  Constrained<T> c;
  if (lay.has_noise()) {
    const T sd = T(kNoiseSdFloor) + softplus(p[lay.noise]);
    c.noise_var = sd * sd;
  }
  const T amp = softplus(p[lay.amplitude]);
  c.spec.family = lay.family;
  c.spec.amplitude_sq = amp * amp;
  c.spec.lengthscales.resize(lay.num_lengthscales);
  for (Eigen::Index k = 0; k < lay.num_lengthscales; ++k)
    c.spec.lengthscales[k] = softplus(p[lay.lengthscale + k]);

  const Eigen::Index m = lay.num_inducing;
  if (lay.has_inducing()) {
    c.inducing.resize(m, lay.dim);
    for (Eigen::Index j = 0; j < lay.dim; ++j)
      for (Eigen::Index i = 0; i < m; ++i) c.inducing(i, j) = p[lay.inducing + j * m + i];
  }
  if (lay.has_q()) {
    c.q.whitened = lay.whitened;
    c.q.mean = p.segment(lay.q_mean, m);
    c.q.cov_factor = Mat<T>::Zero(m, m);
    Eigen::Index k = lay.q_factor;
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = j; i < m; ++i, ++k)
        c.q.cov_factor(i, j) = i == j ? softplus(p[k]) : p[k];
  }
  if (lay.has_v()) c.v = softplus(p[lay.v]);
  return c;
}

VectorXd unconstrain(const ParamLayout& lay, const Constrained<double>& c);

}  // namespace tsgp
