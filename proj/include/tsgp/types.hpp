#pragma once

// Storage convention used throughout the library: Eigen's default column-major
// dense matrices, one data point per ROW (an N x d input matrix holds N points
// of dimension d). Cross-covariances K(A, B) are |A| x |B|.

#include <Eigen/Dense>

#include <cmath>
#include <type_traits>

namespace tsgp {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using MatrixXd = Mat<double>;
using VectorXd = Vec<double>;

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct GaussianPrediction {
  VectorXd mean;
  MatrixXd cov;
};

// Primal value of a scalar that may carry derivative information.
inline double value_of(double x) { return x; }

template <typename T>
Vec<double> values_of(const Vec<T>& v) {
  Vec<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = value_of(v[i]);
  return out;
}

template <typename T>
Mat<double> values_of(const Mat<T>& m) {
  Mat<double> out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = value_of(m(i, j));
  return out;
}

}  // namespace tsgp
