#include "tsgp/trainer/objectives.hpp"

namespace tsgp {

namespace {

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Exact log marginal gradient: dL/dp = 1/2 sum((alpha alpha^T - K^-1) o dK/dp).
// Only the O(N^2) covariance assembly runs on dual numbers.
VectorXd exact_gradient(const ParamLayout& lay, const VectorXd& p, const MatrixXd& x,
                        const VectorXd& y, const std::vector<bool>* mask, double* value) {
  const Constrained<double> c = constrain(lay, p);
  const ExactGpState<double> st(c.spec, c.noise_var, x, y);
  const double lml = exact_log_marginal(st);
  if (!std::isfinite(lml)) throw NonFiniteObjective("objective is not finite");
  if (value) *value = lml;
  const Eigen::Index n = x.rows();
  MatrixXd w = st.alpha * st.alpha.transpose();
  w -= cholesky_solve(st.factor, MatrixXd::Identity(n, n));

  constexpr int K = kGradientChunk;
  using D = Dual<K>;
  std::vector<Eigen::Index> coords;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (mask == nullptr || (*mask)[static_cast<std::size_t>(i)]) coords.push_back(i);
  VectorXd g = VectorXd::Zero(p.size());
  for (std::size_t start = 0; start < coords.size(); start += K) {
    Vec<D> pd = p.cast<D>();
    const std::size_t stop = std::min(coords.size(), start + K);
    for (std::size_t k = start; k < stop; ++k)
      pd[coords[k]] = D::variable(p[coords[k]], static_cast<int>(k - start));
    const Constrained<D> cd = constrain(lay, pd);
    Mat<D> kd = cross_cov(cd.spec, x, x);
    kd.diagonal().array() += cd.noise_var;
    VectorXd acc = VectorXd::Zero(K);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        for (int k = 0; k < K; ++k) acc[k] += w(i, j) * kd(i, j).d[k];
    for (std::size_t k = start; k < stop; ++k) {
      const double d = 0.5 * acc[static_cast<Eigen::Index>(k - start)];
      if (!std::isfinite(d)) throw NonFiniteObjective("gradient is not finite");
      g[coords[k]] = d;
    }
  }
  return g;
}

}  // namespace

VectorXd variational_gradient(const ParamLayout& lay, const VectorXd& p, const MatrixXd& x,
                              const VectorXd& y, std::span<const Eigen::Index> batch,
                              double jitter_rel) {
  if (!lay.has_q()) throw InputError("method " + to_string(lay.method) + " has no q(u)");
  const Constrained<double> c = constrain(lay, p);
  const bool poisson = is_poisson(lay.method);
  const SparseModel<double> model(c.spec, poisson ? 1.0 : c.noise_var, c.inducing, x, y, jitter_rel);
  const NystromCache<double> cache = build_cache(model, batch);
  const double scale =
      batch.empty() ? 1.0 : static_cast<double>(model.num_data()) / static_cast<double>(batch.size());
  const double v = lay.method == Method::kSvgpPoissonNew ? c.v : 1.0;

  // d/dm and d/dLq of the expected log likelihood through mu_i = p_i^T m and
  // s_i = |Lq^T p_i|^2.
  const MatrixXd proj = lay.whitened ? cache.a : solve_triangular(cache.kuu, cache.a, true);
  const MatrixXd lq = c.q.cov_factor.triangularView<Eigen::Lower>();
  const VectorXd mu = proj.transpose() * c.q.mean;
  const VectorXd s = (lq.transpose() * proj).colwise().squaredNorm().transpose();
  VectorXd dmu(cache.size()), ds(cache.size());
  for (Eigen::Index i = 0; i < cache.size(); ++i) {
    const double yi = y[cache.rows[static_cast<std::size_t>(i)]];
    if (poisson) {
      const double rate = std::exp(mu[i] + 0.5 * (v * cache.resid[i] + s[i]));
      dmu[i] = yi - rate;
      ds[i] = -0.5 * rate;
    } else {
      dmu[i] = (yi - mu[i]) / c.noise_var;
      ds[i] = -0.5 / c.noise_var;
    }
  }
  VectorXd gm = scale * (proj * dmu);
  MatrixXd gl = (2.0 * scale) * (proj * ds.asDiagonal() * proj.transpose()) * lq;

  // KL[q(u) || p(u)]
  if (lay.whitened) {
    gm -= c.q.mean;
    gl -= lq;
  } else {
    gm -= cholesky_solve(cache.kuu, c.q.mean);
    gl -= cholesky_solve(cache.kuu, lq);
  }
  const Eigen::Index m = lay.num_inducing;
  for (Eigen::Index i = 0; i < m; ++i) gl(i, i) += 1.0 / lq(i, i);

  VectorXd g = VectorXd::Zero(lay.total);
  g.segment(lay.q_mean, m) = gm;
  Eigen::Index k = lay.q_factor;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = j; i < m; ++i, ++k) g[k] = i == j ? gl(i, j) * sigmoid(p[k]) : gl(i, j);
  return g;
}

VectorXd objective_gradient(const ParamLayout& lay, const VectorXd& p, const MatrixXd& x,
                            const VectorXd& y, std::span<const Eigen::Index> batch,
                            double jitter_rel, GradientMethod method,
                            const std::vector<bool>* mask, double* value) {
  auto f = [&](const auto& q) { return objective_value(lay, q, x, y, batch, jitter_rel); };
  if (method == GradientMethod::kForward && lay.method == Method::kExact)
    return exact_gradient(lay, p, x, y, mask, value);
  if (method == GradientMethod::kFiniteDifference || !lay.has_q())
    return gradient(f, p, method, mask, value);

  std::vector<bool> rest(static_cast<std::size_t>(p.size()), true);
  if (mask) rest = *mask;
  std::vector<bool> qmask(rest.size(), false);
  for (Eigen::Index i : lay.group("q")) {
    qmask[static_cast<std::size_t>(i)] = rest[static_cast<std::size_t>(i)];
    rest[static_cast<std::size_t>(i)] = false;
  }
  VectorXd g = forward_gradient(f, p, &rest, value);
  const VectorXd gq = variational_gradient(lay, p, x, y, batch, jitter_rel);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (qmask[static_cast<std::size_t>(i)]) {
      if (!std::isfinite(gq[i])) throw NonFiniteObjective("gradient is not finite");
      g[i] = gq[i];
    }
  return g;
}

}  // namespace tsgp
