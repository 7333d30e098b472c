// tsgp: command-line front end for training, prediction, bound comparison
// and repeatable experiments.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "tsgp/collapsed.hpp"
#include "tsgp/exact_gp.hpp"
#include "tsgp/expcli/config.hpp"
#include "tsgp/expcli/experiment.hpp"
#include "tsgp/expcli/metrics.hpp"
#include "tsgp/trainer/kmeans.hpp"

namespace fs = std::filesystem;
using namespace tsgp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

ExperimentConfig load_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  ExperimentConfig cfg = load_experiment_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.output_dir = g.out;
  return cfg;
}

std::string out_dir(const Globals& g, const std::string& fallback) {
  return g.out.empty() ? fallback : g.out;
}

int cmd_gen_data(const Globals& g, const std::string& kind, int n, int dim, double noise_sd,
                 const std::string& file) {
  DatasetSource src;
  src.generator = kind;
  src.n = n;
  src.dim = dim;
  src.noise_sd = noise_sd;
  src.seed = g.seed.value_or(0);
  if (kind != "snelson_like" && kind != "snelson_table" && kind != "poisson_toy" && kind != "synthetic")
    throw ConfigError("unknown --kind '" + kind + "'");
  const Dataset d = load_dataset(src);
  std::string path = file;
  if (path.empty()) {
    const std::string dir = out_dir(g, ".");
    ensure_dir(dir);
    path = (fs::path(dir) / (kind + ".csv")).string();
  }
  write_csv(path, d);
  std::cout << "wrote " << d.size() << " rows to " << path << '\n';
  return kExitOk;
}

int cmd_fit(const Globals& g, const std::string& method_name) {
  ExperimentConfig cfg = load_config(g);
  const Method method = method_name.empty() ? cfg.methods.front() : parse_method(method_name);
  const Dataset data = load_dataset(cfg.data);
  const Split split = split_indices(data.size(), cfg.test_fraction, cfg.validation_fraction, cfg.seed);
  const Dataset train = subset(data, split.train);
  const TrainConfig tc = cfg.train_config(method, 0);
  const FitResult r = fit(tc, train);

  Json report;
  report["method"] = to_string(method);
  report["train_config"] = to_json(tc);
  report["steps"] = r.steps;
  report["aborted"] = r.aborted;
  report["abort_reason"] = r.abort_reason;
  report["final_bound"] = r.final_bound;
  report["hyperparameters"] = hyperparameters_json(r);
  report["metrics"]["train"] = metrics_json(evaluate(r, train));
  if (!split.test.empty())
    report["metrics"]["test"] = metrics_json(evaluate(r, subset(data, split.test, train.norm)));
  if (!split.validation.empty())
    report["metrics"]["validation"] =
        metrics_json(evaluate(r, subset(data, split.validation, train.norm)));

  ensure_dir(cfg.output_dir);
  const std::string model_path = (fs::path(cfg.output_dir) / "model.json").string();
  const std::string report_path = (fs::path(cfg.output_dir) / "fit.json").string();
  write_json(model_path, model_to_json(r));
  write_json(report_path, report);
  std::printf("%s: bound=%.6f steps=%ld time=%.2fs\n", to_string(method).c_str(), r.final_bound,
              r.steps, r.seconds);
  if (r.layout.has_noise()) std::printf("  noise_var=%.6g", r.model.noise_var);
  std::printf("  amplitude_sq=%.6g lengthscale[0]=%.6g\n", r.model.spec.amplitude_sq,
              r.model.spec.lengthscales[0]);
  std::printf("wrote %s and %s\n", model_path.c_str(), report_path.c_str());
  if (r.aborted) {
    std::cerr << "error: training stopped early: " << r.abort_reason << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_predict(const Globals& g, const std::string& model_path, const std::string& input,
                bool no_header, bool has_target) {
  const FitResult r = model_from_json(read_json(model_path));
  MatrixXd x_raw;
  std::optional<Dataset> labelled;
  if (has_target) {
    CsvOptions opt;
    opt.header = !no_header;
    opt.counts = is_poisson(r.layout.method);
    labelled = load_csv(input, opt);
    x_raw = labelled->x_raw;
  } else {
    x_raw = load_matrix_csv(input, !no_header);
  }
  require_dims(x_raw.cols() == r.train_x.cols(),
               "input has " + std::to_string(x_raw.cols()) + " column(s), model expects " +
                   std::to_string(r.train_x.cols()));
  const MatrixXd xs = x_raw.rowwise() - r.norm.x_means.transpose();
  const MarginalPrediction p = predict_latent(r, xs);
  const bool counts = is_poisson(r.layout.method);

  const std::string dir = out_dir(g, ".");
  ensure_dir(dir);
  const std::string path = (fs::path(dir) / "predictions.csv").string();
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write '" + path + "'");
  for (Eigen::Index j = 0; j < x_raw.cols(); ++j) std::fprintf(f, "x%ld,", static_cast<long>(j));
  std::fprintf(f, counts ? "f_mean,f_var,rate_mean\n" : "f_mean,f_var,y_mean,y_var\n");
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    for (Eigen::Index j = 0; j < x_raw.cols(); ++j) std::fprintf(f, "%.17g,", x_raw(i, j));
    if (counts) {
      std::fprintf(f, "%.17g,%.17g,%.17g\n", p.mean[i], p.var[i], std::exp(p.mean[i] + 0.5 * p.var[i]));
    } else {
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", p.mean[i] + r.norm.y_mean, p.var[i],
                   p.mean[i] + r.norm.y_mean, p.var[i] + r.model.noise_var);
    }
  }
  if (std::fclose(f) != 0) throw IoError("error while writing '" + path + "'");
  std::cout << "wrote " << xs.rows() << " predictions to " << path << '\n';
  if (labelled) {
    const Metrics m = evaluate(r, *labelled);
    std::printf("mean log predictive density %.6f, RMSE %.6f over %ld points\n", m.mean_log_lik,
                m.rmse, static_cast<long>(m.n));
    write_json((fs::path(dir) / "predict_metrics.json").string(), metrics_json(m));
  }
  return kExitOk;
}

int cmd_compare_bounds(const Globals& g, const std::string& model_path) {
  ExperimentConfig cfg = load_config(g);
  const Dataset data = load_dataset(cfg.data);
  if (data.counts) throw ConfigError("compare-bounds needs a regression dataset");

  KernelSpec<double> spec;
  double noise = 0.0;
  if (!model_path.empty()) {
    const FitResult r = model_from_json(read_json(model_path));
    if (!r.layout.has_noise()) throw ConfigError("compare-bounds needs a Gaussian-likelihood model");
    spec = r.model.spec;
    noise = r.model.noise_var;
  } else {
    spec.family = cfg.train.kernel;
    spec.amplitude_sq = cfg.train.init_amplitude * cfg.train.init_amplitude;
    spec.lengthscales = VectorXd::Constant(spec.family == KernelFamily::kSqExpArd ? data.dim() : 1,
                                           cfg.train.init_lengthscale);
    noise = cfg.train.init_noise_sd * cfg.train.init_noise_sd;
  }
  std::vector<int> ms = cfg.compare_m;
  if (ms.empty()) ms.push_back(cfg.train.num_inducing);

  std::optional<double> exact;
  if (data.size() <= 5000) exact = exact_log_marginal(ExactGpState<double>(spec, noise, data.x, data.y));

  ensure_dir(cfg.output_dir);
  const std::string path = (fs::path(cfg.output_dir) / "compare_bounds.csv").string();
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write '" + path + "'");
  std::fprintf(f, "m,exact,sgpr,sgpr_artemev,sgpr_new,dtc,reg_sgpr,reg_artemev,reg_new,resid_sum,resid_max\n");
  std::printf("%6s %14s %14s %14s %14s\n", "M", "exact", "sgpr", "sgpr_artemev", "sgpr_new");
  for (int m : ms) {
    const MatrixXd z = kmeans_init(data.x, m, cfg.train.kmeans_iters, cfg.seed);
    const SparseModel<double> model(spec, noise, z, data.x, data.y, cfg.train.jitter_rel);
    const auto cache = build_cache(model);
    const BoundReport classic = elbo_sgpr(model, cache);
    const BoundReport artemev = elbo_sgpr_artemev(model, cache);
    const BoundReport fresh = elbo_sgpr_new(model, cache);
    const std::string ex = exact ? std::to_string(*exact) : std::string("n/a");
    std::fprintf(f, "%d,", m);
    if (exact) std::fprintf(f, "%.17g", *exact);
    std::fprintf(f, ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", classic.bound,
                 artemev.bound, fresh.bound, classic.dtc_term, classic.reg_term, artemev.reg_term,
                 fresh.reg_term, cache.resid.sum(), cache.resid.maxCoeff());
    std::printf("%6d %14s %14.6f %14.6f %14.6f\n", m, ex.c_str(), classic.bound, artemev.bound,
                fresh.bound);
  }
  if (std::fclose(f) != 0) throw IoError("error while writing '" + path + "'");
  std::cout << "wrote " << path << '\n';
  return kExitOk;
}

int cmd_experiment(const Globals& g, int jobs) {
  ExperimentConfig cfg = load_config(g);
  if (jobs > 0) cfg.jobs = jobs;
  const ExperimentResult res = run_experiment(cfg, &std::cout);
  std::cout << "wrote " << res.files.size() << " file(s) under " << cfg.output_dir << '\n';
  if (res.any_failed) {
    std::cerr << "error: at least one repeat failed; see the per-repeat JSON\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse variational Gaussian process toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "JSON experiment config");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--out", g.out, "Output directory");

  auto* gen = app.add_subcommand("gen-data", "Write a built-in dataset as CSV");
  std::string kind = "snelson_like";
  int n = 40, dim = 1;
  double noise_sd = 0.3;
  std::string file;
  gen->add_option("--kind", kind, "snelson_like, snelson_table, poisson_toy or synthetic");
  gen->add_option("--n", n, "Number of points (snelson_like, synthetic)");
  gen->add_option("--dim", dim, "Input dimension (synthetic)");
  gen->add_option("--noise-sd", noise_sd, "Noise standard deviation (synthetic)");
  gen->add_option("--file", file, "Output file (default <out>/<kind>.csv)");

  auto* fit_cmd = app.add_subcommand("fit", "Train one method and save the model");
  std::string method;
  fit_cmd->add_option("--method", method, "Method (default: first in the config)");

  auto* pred = app.add_subcommand("predict", "Predict with a saved model");
  std::string model_path, input;
  bool no_header = false, has_target = false;
  pred->add_option("--model", model_path, "model.json written by fit")->required();
  pred->add_option("--input", input, "CSV of inputs")->required();
  pred->add_flag("--no-header", no_header, "Input has no header row");
  pred->add_flag("--has-target", has_target, "Last input column is the target; report metrics");

  auto* cmp = app.add_subcommand("compare-bounds", "Evaluate the collapsed bounds at fixed hyperparameters");
  std::string cmp_model;
  cmp->add_option("--model", cmp_model, "Take hyperparameters from a saved model");

  auto* exp = app.add_subcommand("experiment", "Run a configured experiment grid");
  int jobs = 0;
  exp->add_option("--jobs", jobs, "Concurrent repeats (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*gen) return cmd_gen_data(g, kind, n, dim, noise_sd, file);
    if (*fit_cmd) return cmd_fit(g, method);
    if (*pred) return cmd_predict(g, model_path, input, no_header, has_target);
    if (*cmp) return cmd_compare_bounds(g, cmp_model);
    if (*exp) return cmd_experiment(g, jobs);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const EmptyDataset& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}
