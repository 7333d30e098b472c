#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tsgp/dual.hpp"
#include "tsgp/error.hpp"

namespace tsgp {

enum class GradientMethod { kForward, kFiniteDifference };

// Number of directional derivatives carried per forward pass.
inline constexpr int kGradientChunk = 8;

namespace detail {

inline std::vector<Eigen::Index> active_coords(Eigen::Index n, const std::vector<bool>* mask) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < n; ++i)
    if (mask == nullptr || (*mask)[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

inline void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteObjective(std::string(what) + " is not finite");
}


// One forward pass seeding coords[start, start + K) into a Dual<K>.
template <int K, typename F>
void forward_chunk(F& f, const VectorXd& p, const std::vector<Eigen::Index>& coords,
                   std::size_t start, VectorXd& g, double* value) {
  using D = Dual<K>;
  Vec<D> pd = p.cast<D>();
  const std::size_t stop = std::min(coords.size(), start + K);
  for (std::size_t k = start; k < stop; ++k)
    pd[coords[k]] = D::variable(p[coords[k]], static_cast<int>(k - start));
  const D out = f(pd);
  check_finite(out.v, "objective");
  if (value) *value = out.v;
  for (std::size_t k = start; k < stop; ++k) {
    const double d = out.d[k - start];
    check_finite(d, "gradient");
    g[coords[k]] = d;
  }
}

}  // namespace detail

/// Gradient of `f` by forward-mode dual numbers, up to `kGradientChunk`
/// coordinates per evaluation (narrower duals for the last few). `f` must be
/// callable with `VectorXd` and with `Vec<Dual<K>>` for K in {2, 4, 8}.
/// Coordinates with mask == false get 0. The objective value at `p` is
/// written to `value` when non-null.
template <typename F>
VectorXd forward_gradient(F&& f, const VectorXd& p, const std::vector<bool>* mask = nullptr,
                          double* value = nullptr) {
  const auto coords = detail::active_coords(p.size(), mask);
  VectorXd g = VectorXd::Zero(p.size());
  if (coords.empty()) {
    const double v = static_cast<double>(f(p));
    detail::check_finite(v, "objective");
    if (value) *value = v;
    return g;
  }
  for (std::size_t start = 0; start < coords.size(); start += kGradientChunk) {
    const std::size_t left = coords.size() - start;
    if (left <= 2) {
      detail::forward_chunk<2>(f, p, coords, start, g, value);
    } else if (left <= 4) {
      detail::forward_chunk<4>(f, p, coords, start, g, value);
    } else {
      detail::forward_chunk<kGradientChunk>(f, p, coords, start, g, value);
    }
  }
  return g;
}

/// Central differences with step h = 1e-5 max(1, |p_i|): the reference path.
template <typename F>
VectorXd fd_gradient(F&& f, const VectorXd& p, const std::vector<bool>* mask = nullptr,
                     double* value = nullptr) {
  VectorXd g = VectorXd::Zero(p.size());
  if (value) {
    *value = static_cast<double>(f(p));
    detail::check_finite(*value, "objective");
  }
  for (Eigen::Index i : detail::active_coords(p.size(), mask)) {
    const double h = 1e-5 * std::max(1.0, std::abs(p[i]));
    VectorXd pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    const double fp = static_cast<double>(f(pp));
    const double fm = static_cast<double>(f(pm));
    detail::check_finite(fp, "objective");
    detail::check_finite(fm, "objective");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

template <typename F>
VectorXd gradient(F&& f, const VectorXd& p, GradientMethod method,
                  const std::vector<bool>* mask = nullptr, double* value = nullptr) {
  if (method == GradientMethod::kFiniteDifference) return fd_gradient(f, p, mask, value);
  return forward_gradient(f, p, mask, value);
}

}  // namespace tsgp
