#include "tsgp/trainer/transforms.hpp"

#include <array>
#include <utility>

namespace tsgp {

namespace {

constexpr std::array<std::pair<Method, const char*>, 8> kMethodNames{{
    {Method::kExact, "exact"},
    {Method::kSgpr, "sgpr"},
    {Method::kSgprNew, "sgpr_new"},
    {Method::kSgprArtemev, "sgpr_artemev"},
    {Method::kSvgp, "svgp"},
    {Method::kSvgpNew, "svgp_new"},
    {Method::kSvgpPoisson, "svgp_poisson"},
    {Method::kSvgpPoissonNew, "svgp_poisson_new"},
}};

}  // namespace

std::string to_string(Method m) {
  for (const auto& [k, n] : kMethodNames)
    if (k == m) return n;
  return "unknown";
}

Method parse_method(const std::string& s) {
  for (const auto& [k, n] : kMethodNames)
    if (s == n) return k;
  throw ConfigError("unknown method '" + s + "'");
}

ParamLayout ParamLayout::make(Method method, KernelFamily family, Eigen::Index dim, Eigen::Index m,
                              bool whitened) {
  if (dim < 1) throw InputError("input dimension must be >= 1");
  ParamLayout lay;
  lay.method = method;
  lay.family = family;
  lay.dim = dim;
  lay.whitened = whitened;
  lay.num_inducing = method == Method::kExact ? 0 : m;
  if (method != Method::kExact && m < 1) throw InputError("sparse methods need M >= 1");

  Eigen::Index next = 0;
  if (!is_poisson(method)) lay.noise = next++;
  lay.amplitude = next++;
  lay.lengthscale = next;
  lay.num_lengthscales = family == KernelFamily::kSqExpArd ? dim : 1;
  next += lay.num_lengthscales;
  if (method != Method::kExact) {
    lay.inducing = next;
    next += m * dim;
  }
  if (is_stochastic(method)) {
    lay.q_mean = next;
    next += m;
    lay.q_factor = next;
    next += m * (m + 1) / 2;
  }
  if (method == Method::kSvgpPoissonNew) lay.v = next++;
  lay.total = next;
  return lay;
}

std::string ParamLayout::name(Eigen::Index i) const {
  if (i == noise) return "noise";
  if (i == amplitude) return "amplitude";
  if (i >= lengthscale && i < lengthscale + num_lengthscales)
    return "lengthscale[" + std::to_string(i - lengthscale) + "]";
  const Eigen::Index m = num_inducing;
  if (has_inducing() && i >= inducing && i < inducing + m * dim)
    return "z[" + std::to_string((i - inducing) % m) + "," + std::to_string((i - inducing) / m) + "]";
  if (has_q() && i >= q_mean && i < q_mean + m) return "q_mean[" + std::to_string(i - q_mean) + "]";
  if (has_q() && i >= q_factor && i < q_factor + m * (m + 1) / 2)
    return "q_factor[" + std::to_string(i - q_factor) + "]";
  if (i == v) return "v";
  return "?";
}

std::vector<Eigen::Index> ParamLayout::group(const std::string& g) const {
  std::vector<Eigen::Index> out;
  auto range = [&](Eigen::Index start, Eigen::Index len) {
    for (Eigen::Index k = 0; k < len; ++k) out.push_back(start + k);
  };
  const Eigen::Index m = num_inducing;
  if (g == "noise") {
    if (has_noise()) out.push_back(noise);
  } else if (g == "amplitude") {
    out.push_back(amplitude);
  } else if (g == "lengthscale") {
    range(lengthscale, num_lengthscales);
  } else if (g == "inducing") {
    if (has_inducing()) range(inducing, m * dim);
  } else if (g == "q") {
    if (has_q()) range(q_mean, m + m * (m + 1) / 2);
  } else if (g == "v") {
    if (has_v()) out.push_back(v);
  } else {
    throw ConfigError("unknown parameter group '" + g + "'");
  }
  return out;
}

VectorXd unconstrain(const ParamLayout& lay, const Constrained<double>& c) {
  VectorXd p(lay.total);
  if (lay.has_noise()) {
    const double sd = std::sqrt(c.noise_var);
    if (!(sd > kNoiseSdFloor))
      throw InputError("noise standard deviation must exceed " + std::to_string(kNoiseSdFloor));
    p[lay.noise] = inv_softplus(sd - kNoiseSdFloor);
  }
  p[lay.amplitude] = inv_softplus(std::sqrt(c.spec.amplitude_sq));
  require_dims(c.spec.lengthscales.size() == lay.num_lengthscales,
               "lengthscale count does not match the layout");
  for (Eigen::Index k = 0; k < lay.num_lengthscales; ++k)
    p[lay.lengthscale + k] = inv_softplus(c.spec.lengthscales[k]);

  const Eigen::Index m = lay.num_inducing;
  if (lay.has_inducing()) {
    require_dims(c.inducing.rows() == m && c.inducing.cols() == lay.dim,
                 "inducing inputs do not match the layout");
    for (Eigen::Index j = 0; j < lay.dim; ++j)
      for (Eigen::Index i = 0; i < m; ++i) p[lay.inducing + j * m + i] = c.inducing(i, j);
  }
  if (lay.has_q()) {
    c.q.validate(m);
    p.segment(lay.q_mean, m) = c.q.mean;
    Eigen::Index k = lay.q_factor;
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = j; i < m; ++i, ++k)
        p[k] = i == j ? inv_softplus(c.q.cov_factor(i, j)) : c.q.cov_factor(i, j);
  }
  if (lay.has_v()) {
    if (!(c.v > 0.0)) throw NonPositiveV("scalar v must be > 0");
    p[lay.v] = inv_softplus(c.v);
  }
  return p;
}

}  // namespace tsgp
