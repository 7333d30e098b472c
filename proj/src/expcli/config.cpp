#include "tsgp/expcli/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "tsgp/trainer/transforms.hpp"

namespace tsgp {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + ctx + "." + item.key() + "'");
}

const Json& field(const Json& j, const std::string& key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing key '" + ctx + "." + key + "'");
  return *it;
}

double as_double(const Json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

long long as_int(const Json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  return v.get<long long>();
}

std::uint64_t as_u64(const Json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(what + " must be a non-negative integer");
}

bool as_bool(const Json& v, const std::string& what) {
  if (!v.is_boolean()) throw ConfigError(what + " must be true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& what) {
  if (!v.is_string()) throw ConfigError(what + " must be a string");
  return v.get<std::string>();
}

int as_small_int(const Json& v, const std::string& what) {
  const long long x = as_int(v, what);
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(what + " is out of range");
  return static_cast<int>(x);
}

Json matrix_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

VectorXd vector_from(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = as_double(j[i], what);
  return v;
}

MatrixXd matrix_from(const Json& j, Eigen::Index cols, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of rows");
  MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const VectorXd row = vector_from(j[i], what);
    if (row.size() != cols) throw ConfigError(what + ": row " + std::to_string(i) + " has the wrong length");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

GradientMethod parse_gradient(const std::string& s) {
  if (s == "forward") return GradientMethod::kForward;
  if (s == "finite_difference") return GradientMethod::kFiniteDifference;
  throw ConfigError("gradient must be 'forward' or 'finite_difference', got '" + s + "'");
}

const char* gradient_name(GradientMethod g) {
  return g == GradientMethod::kForward ? "forward" : "finite_difference";
}

DatasetSource parse_dataset(const Json& j) {
  check_keys(j, {"generator", "path", "target", "target_index", "header", "counts", "n", "dim",
                 "noise_sd", "seed"},
             "data");
  DatasetSource s;
  if (j.contains("generator")) s.generator = as_string(j["generator"], "data.generator");
  if (j.contains("path")) s.path = as_string(j["path"], "data.path");
  if (s.generator.empty() == s.path.empty())
    throw ConfigError("data needs exactly one of 'generator' or 'path'");
  if (!s.generator.empty() && s.generator != "snelson_like" && s.generator != "snelson_table" &&
      s.generator != "poisson_toy" && s.generator != "synthetic")
    throw ConfigError("unknown data.generator '" + s.generator + "'");
  if (j.contains("target")) s.csv.target = as_string(j["target"], "data.target");
  if (j.contains("target_index")) s.csv.target_index = as_small_int(j["target_index"], "data.target_index");
  if (j.contains("header")) s.csv.header = as_bool(j["header"], "data.header");
  if (j.contains("counts")) s.csv.counts = as_bool(j["counts"], "data.counts");
  if (j.contains("n")) s.n = as_small_int(j["n"], "data.n");
  if (j.contains("dim")) s.dim = as_small_int(j["dim"], "data.dim");
  if (j.contains("noise_sd")) s.noise_sd = as_double(j["noise_sd"], "data.noise_sd");
  if (j.contains("seed")) s.seed = as_u64(j["seed"], "data.seed");
  if (s.n < 1) throw ConfigError("data.n must be >= 1");
  if (s.dim < 1) throw ConfigError("data.dim must be >= 1");
  if (!(s.noise_sd >= 0.0)) throw ConfigError("data.noise_sd must be >= 0");
  return s;
}

Json dataset_json(const DatasetSource& s) {
  Json j;
  if (!s.generator.empty()) {
    j["generator"] = s.generator;
    if (s.generator == "snelson_like" || s.generator == "synthetic") j["n"] = s.n;
    if (s.generator == "synthetic") {
      j["dim"] = s.dim;
      j["noise_sd"] = s.noise_sd;
    }
    j["seed"] = s.seed;
  } else {
    j["path"] = s.path;
    j["header"] = s.csv.header;
    if (!s.csv.target.empty()) j["target"] = s.csv.target;
    if (s.csv.target_index >= 0) j["target_index"] = s.csv.target_index;
    j["counts"] = s.csv.counts;
  }
  return j;
}

}  // namespace

void apply_train_json(TrainConfig& c, const Json& j) {
  check_keys(j, {"kernel", "num_inducing", "iterations", "epochs", "batch_size", "learning_rate",
                 "init_noise_sd", "init_amplitude", "init_lengthscale", "init_v", "whitened",
                 "inducing_init", "kmeans_iters", "log_every", "fixed", "gradient", "jitter_rel"},
             "train");
  if (j.contains("kernel")) c.kernel = parse_kernel_family(as_string(j["kernel"], "train.kernel"));
  if (j.contains("num_inducing")) c.num_inducing = as_small_int(j["num_inducing"], "train.num_inducing");
  if (j.contains("iterations")) c.iterations = as_small_int(j["iterations"], "train.iterations");
  if (j.contains("epochs")) c.epochs = as_small_int(j["epochs"], "train.epochs");
  if (j.contains("batch_size")) c.batch_size = as_small_int(j["batch_size"], "train.batch_size");
  if (j.contains("learning_rate")) c.learning_rate = as_double(j["learning_rate"], "train.learning_rate");
  if (j.contains("init_noise_sd")) c.init_noise_sd = as_double(j["init_noise_sd"], "train.init_noise_sd");
  if (j.contains("init_amplitude")) c.init_amplitude = as_double(j["init_amplitude"], "train.init_amplitude");
  if (j.contains("init_lengthscale"))
    c.init_lengthscale = as_double(j["init_lengthscale"], "train.init_lengthscale");
  if (j.contains("init_v")) c.init_v = as_double(j["init_v"], "train.init_v");
  if (j.contains("whitened")) c.whitened = as_bool(j["whitened"], "train.whitened");
  if (j.contains("inducing_init")) c.inducing_init = as_string(j["inducing_init"], "train.inducing_init");
  if (j.contains("kmeans_iters")) c.kmeans_iters = as_small_int(j["kmeans_iters"], "train.kmeans_iters");
  if (j.contains("log_every")) c.log_every = as_small_int(j["log_every"], "train.log_every");
  if (j.contains("fixed")) {
    if (!j["fixed"].is_array()) throw ConfigError("train.fixed must be an array of group names");
    c.fixed.clear();
    for (const auto& g : j["fixed"]) {
      const std::string name = as_string(g, "train.fixed[]");
      static const std::set<std::string> groups{"noise", "amplitude", "lengthscale", "inducing", "q", "v"};
      if (!groups.count(name)) throw ConfigError("train.fixed: unknown group '" + name + "'");
      c.fixed.push_back(name);
    }
  }
  if (j.contains("gradient")) c.gradient = parse_gradient(as_string(j["gradient"], "train.gradient"));
  if (j.contains("jitter_rel")) c.jitter_rel = as_double(j["jitter_rel"], "train.jitter_rel");
  if (c.inducing_init != "kmeans" && c.inducing_init != "data")
    throw ConfigError("train.inducing_init must be 'kmeans' or 'data'");
  if (c.kmeans_iters < 0) throw ConfigError("train.kmeans_iters must be >= 0");
  if (!(c.jitter_rel >= 0.0)) throw ConfigError("train.jitter_rel must be >= 0");
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["method"] = to_string(c.method);
  j["kernel"] = std::string(to_string(c.kernel));
  j["num_inducing"] = c.num_inducing;
  j["iterations"] = c.iterations;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["init_noise_sd"] = c.init_noise_sd;
  j["init_amplitude"] = c.init_amplitude;
  j["init_lengthscale"] = c.init_lengthscale;
  j["init_v"] = c.init_v;
  j["whitened"] = c.whitened;
  j["inducing_init"] = c.inducing_init;
  j["kmeans_iters"] = c.kmeans_iters;
  j["log_every"] = c.log_every;
  j["fixed"] = c.fixed;
  j["gradient"] = gradient_name(c.gradient);
  j["jitter_rel"] = c.jitter_rel;
  return j;
}

void ExperimentConfig::validate() const {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw ConfigError("test_fraction must lie in [0, 1)");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation_fraction must lie in [0, 1)");
  if (test_fraction + validation_fraction > 1.0)
    throw ConfigError("test_fraction + validation_fraction must be <= 1");
  if (plot_grid < 0) throw ConfigError("plot_grid must be >= 0");
  for (int m : compare_m)
    if (m < 1) throw ConfigError("compare_m entries must be >= 1");
  for (Method m : methods) train_config(m, 0).validate();
}

TrainConfig ExperimentConfig::train_config(Method m, int repeat) const {
  TrainConfig c = train;
  c.method = m;
  if (const auto it = method_overrides.find(m); it != method_overrides.end())
    apply_train_json(c, it->second);
  c.seed = seed + static_cast<std::uint64_t>(repeat);
  return c;
}

ExperimentConfig parse_experiment_config(const Json& j) {
  check_keys(j, {"name", "data", "test_fraction", "validation_fraction", "repeats", "seed", "methods",
                 "train", "method_overrides", "output_dir", "jobs", "compare_m", "plot_grid"},
             "config");
  ExperimentConfig c;
  if (j.contains("name")) c.name = as_string(j["name"], "name");
  c.data = parse_dataset(field(j, "data", "config"));
  if (j.contains("test_fraction")) c.test_fraction = as_double(j["test_fraction"], "test_fraction");
  if (j.contains("validation_fraction"))
    c.validation_fraction = as_double(j["validation_fraction"], "validation_fraction");
  if (j.contains("repeats")) c.repeats = as_small_int(j["repeats"], "repeats");
  if (j.contains("seed")) c.seed = as_u64(j["seed"], "seed");
  if (j.contains("methods")) {
    if (!j["methods"].is_array()) throw ConfigError("methods must be an array of method names");
    c.methods.clear();
    for (const auto& m : j["methods"]) c.methods.push_back(parse_method(as_string(m, "methods[]")));
  }
  if (j.contains("train")) apply_train_json(c.train, j["train"]);
  if (j.contains("method_overrides")) {
    const Json& o = j["method_overrides"];
    if (!o.is_object()) throw ConfigError("method_overrides must be an object");
    for (const auto& item : o.items()) {
      const Method m = parse_method(item.key());
      TrainConfig probe;
      apply_train_json(probe, item.value());  // validates keys and types early
      c.method_overrides[m] = item.value();
    }
  }
  if (j.contains("output_dir")) c.output_dir = as_string(j["output_dir"], "output_dir");
  if (j.contains("jobs")) c.jobs = as_small_int(j["jobs"], "jobs");
  if (j.contains("compare_m")) {
    if (!j["compare_m"].is_array()) throw ConfigError("compare_m must be an array of integers");
    for (const auto& m : j["compare_m"]) c.compare_m.push_back(as_small_int(m, "compare_m[]"));
  }
  if (j.contains("plot_grid")) c.plot_grid = as_small_int(j["plot_grid"], "plot_grid");
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  Json j;
  try {
    j = read_json(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig c = parse_experiment_config(j);
  // CSV paths are relative to the config file.
  if (!c.data.path.empty()) {
    const std::filesystem::path p(c.data.path);
    if (p.is_relative())
      c.data.path = (std::filesystem::path(path).parent_path() / p).lexically_normal().string();
  }
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["data"] = dataset_json(c.data);
  j["test_fraction"] = c.test_fraction;
  j["validation_fraction"] = c.validation_fraction;
  j["repeats"] = c.repeats;
  j["seed"] = c.seed;
  Json methods = Json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  Json train = to_json(c.train);
  train.erase("method");
  train.erase("seed");
  j["train"] = train;
  Json overrides = Json::object();
  for (const auto& [m, o] : c.method_overrides) overrides[to_string(m)] = o;
  j["method_overrides"] = overrides;
  j["compare_m"] = c.compare_m;
  j["plot_grid"] = c.plot_grid;
  return j;
}

Dataset load_dataset(const DatasetSource& s) {
  if (s.generator == "snelson_like") return make_snelson_like(s.n, s.seed);
  if (s.generator == "snelson_table") return snelson_like_table();
  if (s.generator == "poisson_toy") return make_poisson_toy(s.seed);
  if (s.generator == "synthetic") return make_synthetic_regression(s.n, s.dim, s.noise_sd, s.seed);
  if (s.path.empty()) throw ConfigError("no dataset configured");
  return load_csv(s.path, s.csv);
}

Json hyperparameters_json(const FitResult& r) {
  const Constrained<double>& c = r.model;
  Json j;
  j["kernel"] = std::string(to_string(c.spec.family));
  if (r.layout.has_noise()) {
    j["noise_var"] = c.noise_var;
  } else {
    j["noise_var"] = nullptr;
  }
  j["amplitude_sq"] = c.spec.amplitude_sq;
  j["lengthscales"] = vector_json(c.spec.lengthscales);
  if (r.layout.has_inducing()) j["inducing"] = matrix_json(c.inducing);
  if (r.layout.has_q()) {
    j["q_whitened"] = c.q.whitened;
    j["q_mean"] = vector_json(c.q.mean);
    j["q_cov_factor"] = matrix_json(c.q.cov_factor);
  }
  if (r.layout.has_v()) j["v"] = c.v;
  return j;
}

Json model_to_json(const FitResult& r) {
  Json j;
  j["format"] = "tsgp-model";
  j["version"] = 1;
  j["method"] = to_string(r.layout.method);
  j["kernel"] = std::string(to_string(r.layout.family));
  j["dim"] = r.layout.dim;
  j["num_inducing"] = r.layout.num_inducing;
  j["whitened"] = r.layout.whitened;
  j["jitter_rel"] = r.config.jitter_rel;
  j["params"] = vector_json(r.params);
  j["hyperparameters"] = hyperparameters_json(r);
  j["final_bound"] = r.final_bound;
  j["aborted"] = r.aborted;
  j["normalization"] = {{"x_means", vector_json(r.norm.x_means)}, {"y_mean", r.norm.y_mean}};
  j["train_x"] = matrix_json(r.train_x);
  j["train_y"] = vector_json(r.train_y);
  return j;
}

FitResult model_from_json(const Json& j) {
  const std::string ctx = "model";
  if (!j.is_object() || j.value("format", "") != "tsgp-model")
    throw ConfigError("not a model file (format != tsgp-model)");
  FitResult r;
  r.config.method = parse_method(as_string(field(j, "method", ctx), "model.method"));
  r.config.kernel = parse_kernel_family(as_string(field(j, "kernel", ctx), "model.kernel"));
  r.config.whitened = as_bool(field(j, "whitened", ctx), "model.whitened");
  r.config.jitter_rel = as_double(field(j, "jitter_rel", ctx), "model.jitter_rel");
  const auto dim = static_cast<Eigen::Index>(as_int(field(j, "dim", ctx), "model.dim"));
  const auto m = static_cast<Eigen::Index>(as_int(field(j, "num_inducing", ctx), "model.num_inducing"));
  if (dim < 1 || m < 0) throw ConfigError("model: invalid dim or num_inducing");
  r.layout = ParamLayout::make(r.config.method, r.config.kernel, dim, m, r.config.whitened);
  r.params = vector_from(field(j, "params", ctx), "model.params");
  if (r.params.size() != r.layout.total)
    throw ConfigError("model: expected " + std::to_string(r.layout.total) + " parameters, found " +
                      std::to_string(r.params.size()));
  r.model = constrain(r.layout, r.params);
  const Json& norm = field(j, "normalization", ctx);
  r.norm.x_means = vector_from(field(norm, "x_means", ctx), "model.normalization.x_means");
  r.norm.y_mean = as_double(field(norm, "y_mean", ctx), "model.normalization.y_mean");
  if (r.norm.x_means.size() != dim) throw ConfigError("model: normalization has the wrong dimension");
  r.train_x = matrix_from(field(j, "train_x", ctx), dim, "model.train_x");
  r.train_y = vector_from(field(j, "train_y", ctx), "model.train_y");
  if (r.train_y.size() != r.train_x.rows()) throw ConfigError("model: train_x and train_y differ in length");
  if (j.contains("final_bound") && j["final_bound"].is_number()) r.final_bound = j["final_bound"].get<double>();
  if (j.contains("aborted") && j["aborted"].is_boolean()) r.aborted = j["aborted"].get<bool>();
  return r;
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error while writing '" + path + "'");
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace tsgp
