#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsgp/data.hpp"
#include "tsgp/linalg.hpp"
#include "tsgp/trainer/adam.hpp"
#include "tsgp/trainer/gradient.hpp"
#include "tsgp/trainer/transforms.hpp"

namespace tsgp {

struct TrainConfig {
  Method method = Method::kSgprNew;
  KernelFamily kernel = KernelFamily::kSqExp;
  int num_inducing = 10;
  int iterations = 1000;  // full-batch optimizer steps
  int epochs = 100;       // stochastic methods with 0 < batch_size < N
  int batch_size = 0;     // 0 means full batch
  double learning_rate = 0.01;
  std::uint64_t seed = 0;

  double init_noise_sd = 0.51;
  double init_amplitude = 0.69;  // standard deviation, squared into amplitude_sq
  double init_lengthscale = 1.0;
  double init_v = 1.0;
  bool whitened = true;

  // "kmeans" (default) or "data" (Z = X, M = N).
  std::string inducing_init = "kmeans";
  int kmeans_iters = 30;
  std::optional<MatrixXd> initial_inducing;  // overrides inducing_init when set

  int log_every = 10;  // full-batch steps between trace points
  std::vector<std::string> fixed;  // parameter groups held at their initial values
  GradientMethod gradient = GradientMethod::kForward;
  double jitter_rel = kDefaultRelativeJitter;

  void validate() const;
};

struct TracePoint {
  long step = 0;
  double bound = 0.0;
  double noise_var = 0.0;
  double v = 1.0;
};

struct FitResult {
  TrainConfig config;
  ParamLayout layout;
  VectorXd params;                 // unconstrained
  Constrained<double> model;       // constrained view of `params`
  std::vector<TracePoint> trace;
  double final_bound = 0.0;        // full-data objective at the returned parameters
  double final_fit = 0.0;
  double final_reg = 0.0;
  double final_kl = 0.0;
  std::vector<double> v_values;    // per-row optimal v (Gaussian new bounds) or the learned scalar
  std::vector<int> v_histogram;    // 20 equal bins on [0, 1]
  long steps = 0;
  double seconds = 0.0;
  bool aborted = false;
  std::string abort_reason;

  // Training data (normalized) kept for prediction.
  MatrixXd train_x;
  VectorXd train_y;
  Normalization norm;
};

/// Runs the optimizer for `cfg.method` on `train` (inputs and targets already
/// normalized). Numerical failures stop training early: the result then holds
/// the last parameters at which the objective was finite and `aborted` is set.
FitResult fit(const TrainConfig& cfg, const Dataset& train);

/// Objective of `r`'s method on its full training data at unconstrained `p`.
double full_objective(const FitResult& r, const VectorXd& p);

struct MarginalPrediction {
  VectorXd mean;  // latent mean, normalized scale
  VectorXd var;   // latent variance
};

/// Posterior marginals of the latent function at normalized inputs `xstar`.
MarginalPrediction predict_latent(const FitResult& r, const MatrixXd& xstar);

}  // namespace tsgp
