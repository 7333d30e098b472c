#pragma once

#include <cstdint>

#include "tsgp/types.hpp"

namespace tsgp {

/// Lloyd's algorithm started from a random subset of the rows of `x`.
/// Empty clusters are reseeded with the point farthest from its center.
/// Throws MTooLarge when m > rows of x.
MatrixXd kmeans_init(const MatrixXd& x, Eigen::Index m, int max_iters = 30, std::uint64_t seed = 0);

}  // namespace tsgp
