#pragma once

#include "tsgp/error.hpp"
#include "tsgp/types.hpp"

namespace tsgp {

/// Gaussian q(u) = N(mean, factor factor^T).
///
/// Whitened: u = L_uu eps with q(eps) = N(mean, S), so KL is taken against
/// N(0, I). Unwhitened: q(u) = N(mean, S) directly.
template <typename T>
struct GaussianVariational {
  Vec<T> mean;
  Mat<T> cov_factor;  // lower triangular, positive diagonal
  bool whitened = true;

  Eigen::Index size() const { return mean.size(); }

  Mat<T> cov() const {
    const Mat<T> l = cov_factor.template triangularView<Eigen::Lower>();
    return l * l.transpose();
  }

  void validate(Eigen::Index m) const {
    require_dims(mean.size() == m && cov_factor.rows() == m && cov_factor.cols() == m,
                 "q(u) size " + std::to_string(mean.size()) + " does not match M=" +
                     std::to_string(m));
    for (Eigen::Index i = 0; i < m; ++i)
      if (!(value_of(cov_factor(i, i)) > 0.0))
        throw InputError("q(u) covariance factor must have a positive diagonal");
  }

  static GaussianVariational prior(Eigen::Index m, bool whitened_flag = true) {
    return {Vec<T>::Zero(m), Mat<T>::Identity(m, m), whitened_flag};
  }
};

// Mean and variance of the latent function at each training row induced by
// q(u) through the conditional mean K_fu K_uu^{-1} u. The variance excludes
// any k_ii - q_ii contribution.
template <typename T>
struct LatentMarginals {
  Vec<T> mean;
  Vec<T> var;
};

}  // namespace tsgp
