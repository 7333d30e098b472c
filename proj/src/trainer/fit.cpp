#include "tsgp/trainer/fit.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "tsgp/random.hpp"
#include "tsgp/trainer/kmeans.hpp"
#include "tsgp/trainer/objectives.hpp"

namespace tsgp {

namespace {

constexpr int kHistogramBins = 20;
constexpr Eigen::Index kPredictChunk = 256;

std::vector<int> histogram01(const std::vector<double>& v) {
  std::vector<int> h(kHistogramBins, 0);
  for (double x : v) {
    auto b = static_cast<int>(x * kHistogramBins);
    b = std::clamp(b, 0, kHistogramBins - 1);
    ++h[static_cast<std::size_t>(b)];
  }
  return h;
}

MatrixXd initial_inducing(const TrainConfig& cfg, const Dataset& train) {
  if (cfg.initial_inducing) {
    require_dims(cfg.initial_inducing->cols() == train.dim(),
                 "initial inducing inputs have the wrong dimension");
    return *cfg.initial_inducing;
  }
  if (cfg.inducing_init == "data") return train.x;
  if (cfg.inducing_init == "kmeans")
    return kmeans_init(train.x, cfg.num_inducing, cfg.kmeans_iters, cfg.seed);
  throw ConfigError("inducing_init must be 'kmeans' or 'data', got '" + cfg.inducing_init + "'");
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 0) throw ConfigError("batch_size must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (!(init_noise_sd > kNoiseSdFloor)) throw ConfigError("init_noise_sd must exceed the noise floor");
  if (!(init_amplitude > 0.0) || !(init_lengthscale > 0.0) || !(init_v > 0.0))
    throw ConfigError("initial amplitude, lengthscale and v must be > 0");
  if (method != Method::kExact && inducing_init != "data" && !initial_inducing && num_inducing < 1)
    throw ConfigError("num_inducing must be >= 1");
}

double full_objective(const FitResult& r, const VectorXd& p) {
  return objective_value<double>(r.layout, p, r.train_x, r.train_y, {}, r.config.jitter_rel);
}

FitResult fit(const TrainConfig& cfg, const Dataset& train) {
  cfg.validate();
  if (train.size() == 0) throw EmptyDataset("training set is empty");
  if (is_poisson(cfg.method) && !train.counts)
    throw ConfigError("method " + to_string(cfg.method) + " needs a count dataset");
  const auto t0 = std::chrono::steady_clock::now();

  FitResult r;
  r.config = cfg;
  r.train_x = train.x;
  r.train_y = train.y;
  r.norm = train.norm;

  MatrixXd z;
  if (cfg.method != Method::kExact) z = initial_inducing(cfg, train);
  r.layout = ParamLayout::make(cfg.method, cfg.kernel, train.dim(), z.rows(), cfg.whitened);
  if (cfg.method == Method::kExact && train.size() > kExactGpMaxN)
    throw ProblemTooLarge("exact GP refuses N=" + std::to_string(train.size()));

  Constrained<double> init;
  init.noise_var = cfg.init_noise_sd * cfg.init_noise_sd;
  init.spec.family = cfg.kernel;
  init.spec.amplitude_sq = cfg.init_amplitude * cfg.init_amplitude;
  init.spec.lengthscales = VectorXd::Constant(r.layout.num_lengthscales, cfg.init_lengthscale);
  init.inducing = z;
  if (r.layout.has_q()) init.q = GaussianVariational<double>::prior(z.rows(), cfg.whitened);
  init.v = cfg.init_v;
  VectorXd p = unconstrain(r.layout, init);

  std::vector<bool> mask(static_cast<std::size_t>(p.size()), true);
  for (const auto& g : cfg.fixed)
    for (Eigen::Index i : r.layout.group(g)) mask[static_cast<std::size_t>(i)] = false;

  const Eigen::Index n = train.size();
  const bool minibatch = is_stochastic(cfg.method) && cfg.batch_size > 0 && cfg.batch_size < n;
  const MatrixXd& x = r.train_x;
  const VectorXd& y = r.train_y;
  const double jitter = cfg.jitter_rel;

  auto record = [&](long step, double bound, const VectorXd& at) {
    const Constrained<double> c = constrain(r.layout, at);
    r.trace.push_back({step, bound, c.noise_var, c.v});
  };

  AdamState adam(p.size(), cfg.learning_rate);
  VectorXd last_good = p;
  try {
    if (!minibatch) {
      for (long step = 0; step < cfg.iterations; ++step) {
        double value = 0.0;
        const VectorXd g =
            objective_gradient(r.layout, p, x, y, {}, jitter, cfg.gradient, &mask, &value);
        if (step % cfg.log_every == 0) record(step, value, p);
        last_good = p;
        adam_step(adam, p, g);
        if (!p.allFinite()) throw NonFiniteObjective("parameters became non-finite");
        ++r.steps;
      }
    } else {
      Random rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
      std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      const auto b = static_cast<std::size_t>(cfg.batch_size);
      record(0, full_objective(r, p), p);
      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += b) {
          const std::span<const Eigen::Index> batch(order.data() + start,
                                                    std::min(b, order.size() - start));
          const VectorXd g = objective_gradient(r.layout, p, x, y, batch, jitter, cfg.gradient, &mask);
          last_good = p;
          adam_step(adam, p, g);
          if (!p.allFinite()) throw NonFiniteObjective("parameters became non-finite");
          ++r.steps;
        }
        record(r.steps, full_objective(r, p), p);
      }
    }
  } catch (const NumericalError& e) {
    r.aborted = true;
    r.abort_reason = e.what();
    p = last_good;
  }

  // Final full-data evaluation; a failure here means the last step produced an
  // unusable point, so fall back once more.
  BoundTerms<double> t;
  try {
    t = objective_terms<double>(r.layout, p, x, y, {}, jitter);
    if (!std::isfinite(t.value)) throw NonFiniteObjective("final objective is not finite");
  } catch (const NumericalError& e) {
    if (!r.aborted) {
      r.aborted = true;
      r.abort_reason = e.what();
    }
    p = last_good;
    t = objective_terms<double>(r.layout, p, x, y, {}, jitter);
  }
  r.params = p;
  r.model = constrain(r.layout, p);
  r.final_bound = t.value;
  r.final_fit = t.fit;
  r.final_reg = t.reg;
  r.final_kl = t.kl;
  if (!minibatch && (r.trace.empty() || r.trace.back().step != r.steps)) record(r.steps, t.value, p);

  if (cfg.method == Method::kSgprNew || cfg.method == Method::kSvgpNew) {
    const SparseModel<double> m(r.model.spec, r.model.noise_var, r.model.inducing, x, y, jitter);
    const VectorXd v = optimal_v(build_cache(m), r.model.noise_var);
    r.v_values.assign(v.data(), v.data() + v.size());
  } else if (cfg.method == Method::kSgprArtemev) {
    const SparseModel<double> m(r.model.spec, r.model.noise_var, r.model.inducing, x, y, jitter);
    r.v_values.push_back(optimal_spherical_v(build_cache(m), r.model.noise_var));
  } else if (cfg.method == Method::kSvgpPoissonNew) {
    r.v_values.push_back(r.model.v);
  }
  if (!r.v_values.empty()) r.v_histogram = histogram01(r.v_values);

  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

MarginalPrediction predict_latent(const FitResult& r, const MatrixXd& xstar) {
  require_dims(xstar.cols() == r.train_x.cols(), "prediction inputs have dimension " +
                                                     std::to_string(xstar.cols()) + ", model has " +
                                                     std::to_string(r.train_x.cols()));
  MarginalPrediction out;
  out.mean.resize(xstar.rows());
  out.var.resize(xstar.rows());
  const Method method = r.layout.method;
  const double jitter = r.config.jitter_rel;

  std::optional<ExactGpState<double>> exact;
  std::optional<SparseModel<double>> sparse;
  OptimalQu qstar;
  if (method == Method::kExact) {
    exact.emplace(r.model.spec, r.model.noise_var, r.train_x, r.train_y);
  } else {
    const double noise = is_poisson(method) ? 1.0 : r.model.noise_var;
    sparse.emplace(r.model.spec, noise, r.model.inducing, r.train_x, r.train_y, jitter);
    if (is_collapsed(method)) qstar = optimal_qu(*sparse, build_cache(*sparse));
  }

  for (Eigen::Index start = 0; start < xstar.rows(); start += kPredictChunk) {
    const Eigen::Index len = std::min(kPredictChunk, xstar.rows() - start);
    const MatrixXd xs = xstar.middleRows(start, len);
    GaussianPrediction p;
    if (exact) {
      p = exact_predict(*exact, xs);
    } else if (is_collapsed(method)) {
      p = sparse_predict(*sparse, qstar, xs);
    } else {
      p = sparse_predict(*sparse, r.model.q, xs);
    }
    out.mean.segment(start, len) = p.mean;
    out.var.segment(start, len) = p.cov.diagonal().cwiseMax(0.0);
  }
  return out;
}

}  // namespace tsgp
