#include "tsgp/expcli/metrics.hpp"

#include <cmath>

#include "tsgp/nonconjugate.hpp"

namespace tsgp {

Metrics gaussian_metrics(const VectorXd& mean, const VectorXd& var, const VectorXd& y) {
  require_dims(mean.size() == y.size() && var.size() == y.size(),
               "metrics: prediction and target lengths differ");
  Metrics m;
  m.n = y.size();
  m.log_lik.resize(static_cast<std::size_t>(m.n));
  double sq = 0.0;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < m.n; ++i) {
    const double r = y[i] - mean[i];
    const double lp = -0.5 * (kLog2Pi + std::log(var[i]) + r * r / var[i]);
    m.log_lik[static_cast<std::size_t>(i)] = lp;
    ll += lp;
    sq += r * r;
  }
  if (m.n > 0) {
    m.mean_log_lik = ll / static_cast<double>(m.n);
    m.rmse = std::sqrt(sq / static_cast<double>(m.n));
  }
  return m;
}

Metrics evaluate(const FitResult& fit, const Dataset& test) {
  require_dims(test.dim() == fit.train_x.cols(),
               "evaluate: test inputs have dimension " + std::to_string(test.dim()) +
                   ", model has " + std::to_string(fit.train_x.cols()));
  const MatrixXd xs = test.x_raw.rowwise() - fit.norm.x_means.transpose();
  const MarginalPrediction p = predict_latent(fit, xs);

  if (!is_poisson(fit.layout.method)) {
    const VectorXd mean = p.mean.array() + fit.norm.y_mean;
    const VectorXd var = p.var.array() + fit.model.noise_var;
    return gaussian_metrics(mean, var, test.y_raw);
  }

  Metrics m;
  m.n = test.size();
  m.log_lik.resize(static_cast<std::size_t>(m.n));
  double ll = 0.0;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < m.n; ++i) {
    const double y = test.y_raw[i];
    const double lp = poisson_log_predictive(y, p.mean[i], p.var[i]);
    m.log_lik[static_cast<std::size_t>(i)] = lp;
    ll += lp;
    const double r = y - std::exp(p.mean[i] + 0.5 * p.var[i]);
    sq += r * r;
  }
  if (m.n > 0) {
    m.mean_log_lik = ll / static_cast<double>(m.n);
    m.rmse = std::sqrt(sq / static_cast<double>(m.n));
  }
  return m;
}

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  return s;
}

}  // namespace tsgp
