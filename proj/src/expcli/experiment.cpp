#include "tsgp/expcli/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

namespace tsgp {

namespace {

std::mutex g_log_mutex;

void log_line(std::ostream* log, const std::string& s) {
  if (!log) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  *log << s << '\n';
  log->flush();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string repeat_tag(int r) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", r);
  return buf;
}

class CsvFile {
 public:
  explicit CsvFile(const std::string& path) : path_(path), f_(std::fopen(path.c_str(), "w")) {
    if (!f_) throw IoError("cannot write '" + path + "'");
  }
  ~CsvFile() {
    if (f_) std::fclose(f_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  std::FILE* get() { return f_; }

  void close() {
    const int rc = std::fclose(f_);
    f_ = nullptr;
    if (rc != 0) throw IoError("error while writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::FILE* f_;
};

Json trace_json(const std::vector<TracePoint>& trace) {
  Json step = Json::array(), bound = Json::array(), noise = Json::array(), v = Json::array();
  for (const auto& t : trace) {
    step.push_back(t.step);
    bound.push_back(t.bound);
    noise.push_back(t.noise_var);
    v.push_back(t.v);
  }
  return {{"step", step}, {"bound", bound}, {"noise_var", noise}, {"v", v}};
}

Json method_json(const MethodOutcome& o) {
  Json j;
  j["method"] = to_string(o.method);
  j["failed"] = o.failed;
  j["error"] = o.error;
  j["train_config"] = to_json(o.config);
  if (!o.fit) return j;
  const FitResult& f = *o.fit;
  j["aborted"] = f.aborted;
  j["abort_reason"] = f.abort_reason;
  j["steps"] = f.steps;
  j["final_bound"] = f.final_bound;
  j["final_terms"] = {{"fit", f.final_fit}, {"reg", f.final_reg}, {"kl", f.final_kl}};
  j["hyperparameters"] = hyperparameters_json(f);
  Json metrics = Json::object();
  metrics["train"] = o.train_metrics ? metrics_json(*o.train_metrics) : Json();
  metrics["validation"] = o.validation_metrics ? metrics_json(*o.validation_metrics) : Json();
  metrics["test"] = o.test_metrics ? metrics_json(*o.test_metrics) : Json();
  j["metrics"] = metrics;
  j["trace"] = trace_json(f.trace);
  if (!f.v_values.empty()) {
    double lo = f.v_values.front(), hi = lo, sum = 0.0;
    for (double v : f.v_values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    j["v"] = {{"count", f.v_values.size()},
              {"min", lo},
              {"mean", sum / static_cast<double>(f.v_values.size())},
              {"max", hi},
              {"histogram_edges", {0.0, 1.0}},
              {"histogram", f.v_histogram}};
  }
  return j;
}

void write_trace_csv(const std::string& path, const FitResult& f) {
  CsvFile out(path);
  std::fprintf(out.get(), "step,bound,noise_var,v\n");
  for (const auto& t : f.trace)
    std::fprintf(out.get(), "%ld,%.17g,%.17g,%.17g\n", t.step, t.bound, t.noise_var, t.v);
  out.close();
}

void write_vhist_csv(const std::string& path, const FitResult& f) {
  CsvFile out(path);
  std::fprintf(out.get(), "bin_lo,bin_hi,count\n");
  const auto bins = static_cast<double>(f.v_histogram.size());
  for (std::size_t b = 0; b < f.v_histogram.size(); ++b)
    std::fprintf(out.get(), "%.17g,%.17g,%d\n", static_cast<double>(b) / bins,
                 static_cast<double>(b + 1) / bins, f.v_histogram[b]);
  out.close();
}

// Posterior of the latent process on a grid spanning the training inputs, in
// the original scale: mean and a two-standard-deviation band (intensity scale
// for count models).
std::vector<std::string> write_predict_csv(const std::string& path, const FitResult& f, int grid) {
  std::vector<std::string> written{path};
  const double lo_raw = f.train_x.col(0).minCoeff() + f.norm.x_means[0];
  const double hi_raw = f.train_x.col(0).maxCoeff() + f.norm.x_means[0];
  const double pad = 0.1 * (hi_raw - lo_raw);
  MatrixXd xs(grid, 1);
  for (int i = 0; i < grid; ++i) {
    const double t = grid > 1 ? static_cast<double>(i) / (grid - 1) : 0.5;
    xs(i, 0) = lo_raw - pad + t * (hi_raw - lo_raw + 2.0 * pad) - f.norm.x_means[0];
  }
  const MarginalPrediction p = predict_latent(f, xs);
  const bool counts = is_poisson(f.layout.method);
  CsvFile out(path);
  std::fprintf(out.get(), "x,mean,lower,upper\n");
  for (int i = 0; i < grid; ++i) {
    const double sd = std::sqrt(p.var[i]);
    double mean = p.mean[i] + f.norm.y_mean;
    double lower = mean - 2.0 * sd;
    double upper = mean + 2.0 * sd;
    if (counts) {
      mean = std::exp(p.mean[i] + 0.5 * p.var[i]);
      lower = std::exp(p.mean[i] - 2.0 * sd);
      upper = std::exp(p.mean[i] + 2.0 * sd);
    }
    std::fprintf(out.get(), "%.17g,%.17g,%.17g,%.17g\n", xs(i, 0) + f.norm.x_means[0], mean, lower,
                 upper);
  }
  out.close();
  if (f.layout.has_inducing()) {
    std::string zpath = path;
    zpath.replace(zpath.rfind("predict_"), 8, "inducing_");
    CsvFile z(zpath);
    std::fprintf(z.get(), "z\n");
    for (Eigen::Index k = 0; k < f.model.inducing.rows(); ++k)
      std::fprintf(z.get(), "%.17g\n", f.model.inducing(k, 0) + f.norm.x_means[0]);
    z.close();
    written.push_back(zpath);
  }
  return written;
}

}  // namespace

Json metrics_json(const Metrics& m) {
  return {{"n", m.n}, {"mean_log_lik", m.mean_log_lik}, {"rmse", m.rmse}};
}

RepeatOutcome run_repeat(const ExperimentConfig& cfg, const Dataset& data, int repeat,
                         std::ostream* log) {
  RepeatOutcome out;
  out.repeat = repeat;
  out.seed = cfg.seed + static_cast<std::uint64_t>(repeat);
  const Split split = split_indices(data.size(), cfg.test_fraction, cfg.validation_fraction, out.seed);
  const Dataset train = subset(data, split.train);
  std::optional<Dataset> validation, test;
  if (!split.validation.empty()) validation = subset(data, split.validation, train.norm);
  if (!split.test.empty()) test = subset(data, split.test, train.norm);
  out.n_train = train.size();
  out.n_validation = static_cast<Eigen::Index>(split.validation.size());
  out.n_test = static_cast<Eigen::Index>(split.test.size());

  for (Method m : cfg.methods) {
    MethodOutcome o;
    o.method = m;
    o.config = cfg.train_config(m, repeat);
    try {
      FitResult f = fit(o.config, train);
      o.train_metrics = evaluate(f, train);
      if (validation) o.validation_metrics = evaluate(f, *validation);
      if (test) o.test_metrics = evaluate(f, *test);
      if (f.aborted) {
        o.failed = true;
        o.error = "training stopped: " + f.abort_reason;
      }
      log_line(log, "repeat " + std::to_string(repeat) + " " + to_string(m) +
                        ": bound=" + fmt("%.6f", f.final_bound) +
                        (f.layout.has_noise() ? " noise_var=" + fmt("%.5g", f.model.noise_var) : "") +
                        (o.test_metrics ? " test_loglik=" + fmt("%.4f", o.test_metrics->mean_log_lik) : "") +
                        " steps=" + std::to_string(f.steps) + " time=" + fmt("%.2f", f.seconds) + "s" +
                        (f.aborted ? " [aborted: " + f.abort_reason + "]" : ""));
      o.fit = std::move(f);
    } catch (const Error& e) {
      o.failed = true;
      o.error = e.what();
      log_line(log, "repeat " + std::to_string(repeat) + " " + to_string(m) + ": FAILED: " + e.what());
    }
    out.methods.push_back(std::move(o));
  }
  return out;
}

Json repeat_json(const ExperimentConfig& cfg, const RepeatOutcome& r) {
  Json j;
  j["experiment"] = cfg.name;
  j["repeat"] = r.repeat;
  j["seed"] = r.seed;
  j["config"] = to_json(cfg);
  j["split"] = {{"train", r.n_train}, {"validation", r.n_validation}, {"test", r.n_test}};
  j["error"] = r.error;
  Json methods = Json::array();
  for (const auto& m : r.methods) methods.push_back(method_json(m));
  j["methods"] = methods;
  return j;
}

void write_summary_csv(const std::string& path, const ExperimentConfig& cfg,
                       const std::vector<RepeatOutcome>& repeats) {
  CsvFile out(path);
  std::fprintf(out.get(),
               "method,repeats_ok,repeats_failed,flag,final_bound_mean,final_bound_se,"
               "noise_var_mean,noise_var_se,train_loglik_mean,train_loglik_se,"
               "validation_loglik_mean,validation_loglik_se,test_loglik_mean,test_loglik_se,"
               "test_rmse_mean,test_rmse_se,test_loglik_table\n");
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    std::vector<double> bound, noise, train_ll, val_ll, test_ll, test_rmse;
    int failed = 0;
    for (const auto& r : repeats) {
      if (k >= r.methods.size()) {
        ++failed;
        continue;
      }
      const MethodOutcome& o = r.methods[k];
      if (o.failed || !o.fit) {
        ++failed;
        continue;
      }
      bound.push_back(o.fit->final_bound);
      if (o.fit->layout.has_noise()) noise.push_back(o.fit->model.noise_var);
      if (o.train_metrics) train_ll.push_back(o.train_metrics->mean_log_lik);
      if (o.validation_metrics) val_ll.push_back(o.validation_metrics->mean_log_lik);
      if (o.test_metrics) {
        test_ll.push_back(o.test_metrics->mean_log_lik);
        test_rmse.push_back(o.test_metrics->rmse);
      }
    }
    auto cells = [](const std::vector<double>& v) -> std::string {
      if (v.empty()) return ",";
      const MeanSe s = mean_se(v);
      return fmt("%.17g", s.mean) + "," + fmt("%.17g", s.se);
    };
    const char* flag = bound.empty() ? "all_failed" : failed > 0 ? "partial" : "";
    std::string table;
    if (!test_ll.empty()) {
      const MeanSe s = mean_se(test_ll);
      table = fmt("%.3f", s.mean) + " +/- " + fmt("%.3f", s.se);
    }
    std::fprintf(out.get(), "%s,%d,%d,%s,%s,%s,%s,%s,%s,%s,%s\n", to_string(cfg.methods[k]).c_str(),
                 static_cast<int>(bound.size()), failed, flag, cells(bound).c_str(),
                 cells(noise).c_str(), cells(train_ll).c_str(), cells(val_ll).c_str(),
                 cells(test_ll).c_str(), cells(test_rmse).c_str(), table.c_str());
  }
  out.close();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  const Dataset data = load_dataset(cfg.data);
  namespace fs = std::filesystem;
  const fs::path root(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(root / "plots", ec);
  if (ec) throw IoError("cannot create '" + (root / "plots").string() + "': " + ec.message());
  log_line(log, "experiment '" + cfg.name + "': " + std::to_string(data.size()) + " points, " +
                    std::to_string(data.dim()) + " input dimension(s), " +
                    std::to_string(cfg.repeats) + " repeat(s)");

  ExperimentResult res;
  res.repeats.resize(static_cast<std::size_t>(cfg.repeats));
  auto work = [&](int r) {
    RepeatOutcome& slot = res.repeats[static_cast<std::size_t>(r)];
    try {
      slot = run_repeat(cfg, data, r, log);
    } catch (const Error& e) {
      slot.repeat = r;
      slot.seed = cfg.seed + static_cast<std::uint64_t>(r);
      slot.error = e.what();
      log_line(log, "repeat " + std::to_string(r) + ": FAILED: " + e.what());
    }
  };
  if (cfg.jobs <= 1 || cfg.repeats == 1) {
    for (int r = 0; r < cfg.repeats; ++r) work(r);
  } else {
    std::vector<std::thread> pool;
    const int workers = std::min(cfg.jobs, cfg.repeats);
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int r = next++; r < cfg.repeats; r = next++) work(r);
      });
    for (auto& t : pool) t.join();
  }

  // Files are written after all repeats finish, in repeat order.
  for (const RepeatOutcome& r : res.repeats) {
    const std::string tag = repeat_tag(r.repeat);
    const std::string jpath = (root / ("repeat_" + tag + ".json")).string();
    write_json(jpath, repeat_json(cfg, r));
    res.files.push_back(jpath);
    if (!r.error.empty()) res.any_failed = true;
    bool wrote_train = false;
    for (const MethodOutcome& o : r.methods) {
      if (o.failed) res.any_failed = true;
      if (!o.fit) continue;
      const std::string stem = "_r" + tag + "_" + to_string(o.method) + ".csv";
      const std::string tpath = (root / "plots" / ("trace" + stem)).string();
      write_trace_csv(tpath, *o.fit);
      res.files.push_back(tpath);
      if (!o.fit->v_histogram.empty()) {
        const std::string vpath = (root / "plots" / ("vhist" + stem)).string();
        write_vhist_csv(vpath, *o.fit);
        res.files.push_back(vpath);
      }
      if (o.fit->train_x.cols() == 1 && cfg.plot_grid > 0) {
        const std::string ppath = (root / "plots" / ("predict" + stem)).string();
        for (auto& w : write_predict_csv(ppath, *o.fit, cfg.plot_grid)) res.files.push_back(w);
        if (!wrote_train) {
          const std::string dpath = (root / "plots" / ("train_r" + tag + ".csv")).string();
          CsvFile d(dpath);
          std::fprintf(d.get(), "x,y\n");
          for (Eigen::Index i = 0; i < o.fit->train_x.rows(); ++i)
            std::fprintf(d.get(), "%.17g,%.17g\n", o.fit->train_x(i, 0) + o.fit->norm.x_means[0],
                         o.fit->train_y[i] + o.fit->norm.y_mean);
          d.close();
          res.files.push_back(dpath);
          wrote_train = true;
        }
      }
    }
  }
  const std::string spath = (root / "summary.csv").string();
  write_summary_csv(spath, cfg, res.repeats);
  res.files.push_back(spath);
  return res;
}

}  // namespace tsgp
