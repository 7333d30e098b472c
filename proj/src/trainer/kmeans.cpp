#include "tsgp/trainer/kmeans.hpp"

#include <limits>
#include <numeric>
#include <vector>

#include "tsgp/error.hpp"
#include "tsgp/random.hpp"

namespace tsgp {

MatrixXd kmeans_init(const MatrixXd& x, Eigen::Index m, int max_iters, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (m < 1) throw InputError("k-means needs at least one center");
  if (m > n)
    throw MTooLarge("M=" + std::to_string(m) + " exceeds the number of points N=" + std::to_string(n));

  // Partial Fisher-Yates on an index vector gives the random subset.
  Random rng(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  MatrixXd centers(m, x.cols());
  for (Eigen::Index i = 0; i < m; ++i) centers.row(i) = x.row(idx[static_cast<std::size_t>(i)]);

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
  VectorXd dist(n);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < m; ++k) {
        const double d = (x.row(i) - centers.row(k)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      dist[i] = best_d;
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed && it > 0) break;

    MatrixXd sums = MatrixXd::Zero(m, x.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(m), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = assign[static_cast<std::size_t>(i)];
      sums.row(k) += x.row(i);
      ++counts[static_cast<std::size_t>(k)];
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) {
        centers.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
        continue;
      }
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      centers.row(k) = x.row(far);
      dist[far] = 0.0;
      assign[static_cast<std::size_t>(far)] = k;
    }
  }
  return centers;
}

}  // namespace tsgp
