// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantities. Exit status is non-zero when any binding check fails.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "../tests/test_support.hpp"
#include "tsgp/collapsed.hpp"
#include "tsgp/exact_gp.hpp"
#include "tsgp/expcli/experiment.hpp"
#include "tsgp/nonconjugate.hpp"
#include "tsgp/stochastic.hpp"
#include "tsgp/trainer/objectives.hpp"

using namespace tsgp;
using namespace tsgp::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;  // extra lines printed under the criterion
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int rand_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

KernelFamily rand_family(Rng& rng) {
  switch (rand_int(rng, 0, 2)) {
    case 0:
      return KernelFamily::kSqExp;
    case 1:
      return KernelFamily::kSqExpArd;
    default:
      return KernelFamily::kMatern32;
  }
}

GaussianVariational<double> random_q(Rng& rng, Eigen::Index m, bool whitened) {
  GaussianVariational<double> q;
  q.mean = 0.5 * normal_vector(rng, m);
  q.cov_factor = MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    q.cov_factor(j, j) = uniform(rng, 0.2, 0.9);
    for (Eigen::Index i = j + 1; i < m; ++i) q.cov_factor(i, j) = 0.2 * normal_vector(rng, 1)[0];
  }
  q.whitened = whitened;
  return q;
}

SparseModel<double> model_of(const RegressionInstance& r, double jitter = kDefaultRelativeJitter) {
  return SparseModel<double>(r.spec, r.noise, r.z, r.x, r.y, jitter);
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240101);
  int violations = 0, strict_checked = 0, strict_failed = 0;
  double worst = -1e300;
  const int instances = 250;
  for (int k = 0; k < instances; ++k) {
    const int n = rand_int(rng, 10, 200);
    const int m = rand_int(rng, 1, 20);
    const int dim = rand_int(rng, 1, 3);
    RegressionInstance r = random_instance(rng, n, m, dim, rand_family(rng));
    const auto model = model_of(r);
    const auto c = build_cache(model);
    const BoundReport classic = elbo_sgpr(model, c);
    const BoundReport artemev = elbo_sgpr_artemev(model, c);
    const BoundReport fresh = elbo_sgpr_new(model, c);
    const double exact = exact_log_marginal(ExactGpState<double>(r.spec, r.noise, r.x, r.y));
    const double gaps[] = {classic.bound - artemev.bound, artemev.bound - fresh.bound,
                           fresh.bound - exact};
    for (double g : gaps) {
      worst = std::max(worst, g);
      if (g > 1e-8) ++violations;
    }
    if (c.resid.maxCoeff() > 1e-6) {
      // The two bounds share the DTC term, so strictness is decided on the
      // regularizers where it is not lost to rounding of the total.
      ++strict_checked;
      if (!(classic.reg_term < artemev.reg_term)) ++strict_failed;
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = violations == 0 && strict_failed == 0 && secs < 30.0;
  o.detail = fmt("%d instances, %d chain violations (largest step %.2e), strict on %d/%d, %.1f s",
                 instances, violations, worst, strict_checked - strict_failed, strict_checked, secs);
  return o;
}

Outcome criterion2() {
  Rng rng(77);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = rand_int(rng, 5, 30);
    RegressionInstance r = random_instance(rng, n, 1, rand_int(rng, 1, 2),
                                           k % 2 ? KernelFamily::kMatern32 : KernelFamily::kSqExp);
    r.z = r.x;
    const auto model = model_of(r, 1e-12);
    const auto c = build_cache(model);
    const double exact = exact_log_marginal(ExactGpState<double>(r.spec, r.noise, r.x, r.y));
    for (auto v : {CollapsedVariant::kClassic, CollapsedVariant::kNew, CollapsedVariant::kSpherical})
      worst = std::max(worst, std::abs(collapsed_report(model, c, v).bound - exact) / std::abs(exact));
  }
  Outcome o;
  o.pass = worst < 1e-6;
  o.detail = fmt("20 instances with Z = X, largest relative gap %.2e (tolerance 1e-6)", worst);
  return o;
}

Outcome criterion3() {
  Rng rng(303);
  std::map<std::string, double> err;
  auto note = [&](const std::string& k, double e) { err[k] = std::max(err[k], e); };
  for (int k = 0; k < 20; ++k) {
    const int n = rand_int(rng, 5, 30);
    const int m = rand_int(rng, 1, 5);
    const auto r = random_instance(rng, n, m, rand_int(rng, 1, 2),
                                   k % 2 ? KernelFamily::kMatern32 : KernelFamily::kSqExp);
    const auto model = model_of(r);
    const auto c = build_cache(model);
    const double jit = kDefaultRelativeJitter;
    const MatrixXd kuu = jittered_kuu(r.spec, r.z, jit);
    const MatrixXd kuf = naive_cov(r.spec, r.z, r.x);
    const MatrixXd kff = naive_cov(r.spec, r.x, r.x);
    const MatrixXd qff = kuf.transpose() * lu_inverse(kuu) * kuf;
    const VectorXd res = (kff.diagonal() - qff.diagonal()).cwiseMax(0.0);
    MatrixXd cov = qff;
    cov.diagonal().array() += r.noise;
    const double dtc = dense_mvn_logpdf(r.y, VectorXd::Zero(n), cov);

    // Collapsed closed forms.
    double newreg = 0.0;
    for (int i = 0; i < n; ++i) newreg += std::log(1.0 + res[i] / r.noise);
    note("classic bound", std::abs(elbo_sgpr(model, c).bound - (dtc - res.sum() / (2 * r.noise))));
    note("new bound", std::abs(elbo_sgpr_new(model, c).bound - (dtc - 0.5 * newreg)));
    note("spherical bound", std::abs(elbo_sgpr_artemev(model, c).bound -
                                     (dtc - 0.5 * n * std::log(1.0 + res.sum() / (n * r.noise)))));

    // KL between the variational and prior conditionals, dense.
    {
      const MatrixXd rc = random_spd(rng, m);
      VectorXd v(m);
      for (int i = 0; i < m; ++i) v[i] = uniform(rng, 0.05, 2.0);
      const MatrixXd rh = sym_sqrt(rc);
      const VectorXd mu = normal_vector(rng, m);
      note("conditional KL", std::abs(kl_qfu_pfu(v) - dense_gauss_kl(mu, rh * v.asDiagonal() * rh, mu, rc)));
    }

    // Optimal q(u).
    const OptimalQu q = optimal_qu(model, c);
    const MatrixXd lam_inv = lu_inverse(kuu + kuf * kuf.transpose() / r.noise);
    note("optimal q(u)", std::max((q.mean - kuu * lam_inv * kuf * r.y / r.noise).cwiseAbs().maxCoeff(),
                                  (q.cov - kuu * lam_inv * kuu).cwiseAbs().maxCoeff()));

    // Marginals of q(f_i) for a random q(u), Gaussian and spherical-v forms.
    const auto qr = random_q(rng, m, false);
    const MatrixXd proj = kuu.fullPivLu().solve(kuf).transpose();
    const auto lm = latent_marginals(qr, c);
    // An arbitrary unwhitened q(u) against an ill-conditioned Kuu gives marginals
    // in the thousands, so errors are measured relative to max(1, |oracle|).
    auto scaled = [](const VectorXd& got, const VectorXd& want) {
      return ((got - want).array().abs() / want.array().abs().max(1.0)).maxCoeff();
    };
    note("latent marginals", std::max(scaled(lm.mean, proj * qr.mean),
                                      scaled(lm.var, (proj * qr.cov() * proj.transpose()).diagonal())));
    const double vs = uniform(rng, 0.2, 1.5);
    for (int i = 0; i < n; ++i) {
      const auto mq = marginal_qfi(qr, c, vs, i);
      const double var = vs * res[i] + proj.row(i).dot(qr.cov() * proj.row(i).transpose());
      const double mean = proj.row(i).dot(qr.mean);
      note("spherical marginals", std::max(std::abs(mq.mean - mean) / std::max(1.0, std::abs(mean)),
                                           std::abs(mq.variance - var) / std::max(1.0, var)));
    }

    // Predictive.
    const MatrixXd xs = uniform_matrix(rng, 4, r.x.cols(), -3, 3);
    const auto p = sparse_predict(model, q, xs);
    const MatrixXd ksu = naive_cov(r.spec, xs, r.z);
    const VectorXd pmean = ksu * lam_inv * kuf * r.y / r.noise;
    const MatrixXd pcov = naive_cov(r.spec, xs, xs) - ksu * lu_inverse(kuu) * ksu.transpose() +
                          ksu * lam_inv * ksu.transpose();
    note("predictive", std::max((p.mean - pmean).cwiseAbs().maxCoeff(), (p.cov - pcov).cwiseAbs().maxCoeff()));
  }
  Outcome o;
  double worst = 0.0;
  for (const auto& [k, e] : err) {
    worst = std::max(worst, e);
    o.notes.push_back(fmt("%-20s max error %.2e%s", k.c_str(), e, k.find("marginals") != std::string::npos ? " (scaled by max(1, |oracle|))" : ""));
  }
  o.pass = worst < 1e-7;
  o.detail = fmt("%zu closed forms vs dense oracles on 20 instances (N <= 30, M <= 5), worst %.2e",
                 err.size(), worst);
  return o;
}

double v_objective(double v, double r, double noise) {
  return -0.5 * (v * (1.0 + r / noise) - std::log(v) - 1.0);
}

double golden_max(double r, double noise) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-9, b = 10.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  while (b - a > 1e-12) {
    if (v_objective(c, r, noise) > v_objective(d, r, noise)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

Outcome criterion4() {
  Rng rng(404);
  double worst_v = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double r = uniform(rng, 0.0, 3.0);
    const double noise = uniform(rng, 0.01, 2.0);
    NystromCache<double> c;
    c.resid = VectorXd::Constant(1, r);
    c.rows = {0};
    worst_v = std::max(worst_v, std::abs(optimal_v(c, noise)[0] - golden_max(r, noise)));
  }
  // Uncollapsed form with explicit v: expected log likelihood under
  // q(f_i) = N(mu_i, s_i + v_i r_i) minus KL[q(u)||p(u)] minus the conditional KL.
  double worst_b = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto r = random_instance(rng, rand_int(rng, 10, 60), rand_int(rng, 1, 8), 1);
    const auto model = model_of(r);
    const auto c = build_cache(model);
    const auto q = optimal_qu_whitened(model, c);
    const VectorXd v = optimal_v(c, r.noise);
    const auto lm = latent_marginals(q, c);
    double ell = 0.0;
    for (Eigen::Index i = 0; i < r.y.size(); ++i) {
      const double d = r.y[i] - lm.mean[i];
      ell += -0.5 * std::log(2.0 * M_PI * r.noise) -
             (d * d + lm.var[i] + v[i] * c.resid[i]) / (2.0 * r.noise);
    }
    const double bound = ell - kl_qu_pu(q, c.kuu) - kl_qfu_pfu(v);
    worst_b = std::max(worst_b, std::abs(bound - elbo_sgpr_new(model, c).bound));
  }
  Outcome o;
  o.pass = worst_v < 1e-6 && worst_b < 1e-7;
  o.detail = fmt("v* vs golden section: %.2e over 100 pairs (tol 1e-6); uncollapsed at (q*, v*) vs "
                 "collapsed new: %.2e over 20 instances (tol 1e-7)",
                 worst_v, worst_b);
  return o;
}

Outcome criterion5() {
  const Method methods[] = {Method::kExact,       Method::kSgpr,        Method::kSgprNew,
                            Method::kSgprArtemev, Method::kSvgp,        Method::kSvgpNew,
                            Method::kSvgpPoisson, Method::kSvgpPoissonNew};
  double worst = 0.0;
  int coords = 0, bad = 0;
  for (Method method : methods) {
    for (bool whitened : {true, false}) {
      if (!is_stochastic(method) && !whitened) continue;
      Rng rng(500 + static_cast<int>(method));
      const MatrixXd x = uniform_matrix(rng, 15, 1, -2, 2);
      VectorXd y(15);
      for (int i = 0; i < 15; ++i)
        y[i] = is_poisson(method) ? std::floor(3.0 + 2.0 * std::sin(2 * x(i, 0)) + uniform(rng, 0, 1))
                                  : std::sin(2 * x(i, 0)) + 0.2 * normal_vector(rng, 1)[0];
      const auto lay = ParamLayout::make(method, KernelFamily::kSqExp, 1, 3, whitened);
      Constrained<double> c;
      c.noise_var = uniform(rng, 0.05, 0.5);
      c.spec.amplitude_sq = uniform(rng, 0.3, 1.5);
      c.spec.lengthscales = VectorXd::Constant(1, uniform(rng, 0.5, 1.5));
      if (method != Method::kExact) c.inducing = uniform_matrix(rng, 3, 1, -2, 2);
      if (lay.has_q()) c.q = random_q(rng, 3, whitened);
      c.v = uniform(rng, 0.4, 1.2);
      const VectorXd p = unconstrain(lay, c);
      const VectorXd g = objective_gradient(lay, p, x, y, {}, kDefaultRelativeJitter, GradientMethod::kForward);
      const VectorXd fd =
          objective_gradient(lay, p, x, y, {}, kDefaultRelativeJitter, GradientMethod::kFiniteDifference);
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        ++coords;
        // Relative error, with the scale floored at 1e-3 so near-zero
        // coordinates are held to an absolute 1e-7.
        const double scale = std::max({std::abs(g[i]), std::abs(fd[i]), 1e-3});
        const double rel = std::abs(g[i] - fd[i]) / scale;
        worst = std::max(worst, rel);
        if (rel >= 1e-4) ++bad;
      }
    }
  }
  Outcome o;
  o.pass = bad == 0;
  o.detail = fmt("%d coordinates over 8 methods (whitened and unwhitened q), %d above 1e-4, worst "
                 "relative error %.2e",
                 coords, bad, worst);
  return o;
}

Outcome criterion6() {
  Rng rng(606);
  const auto r = random_instance(rng, 20, 4, 1);
  const auto model = model_of(r);
  const auto full = build_cache(model);
  double worst = 0.0;
  std::vector<Eigen::Index> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (bool whitened : {true, false}) {
    const auto q = random_q(rng, 4, whitened);
    for (auto v : {PenaltyVariant::kClassic, PenaltyVariant::kNew}) {
      const double exact = elbo_svgp_uncollapsed(q, model, full, v).value;
      double singles = 0.0;
      for (Eigen::Index i = 0; i < 20; ++i) {
        const std::vector<Eigen::Index> b{i};
        singles += elbo_svgp_minibatch(q, model, std::span<const Eigen::Index>(b), v);
      }
      double parts = 0.0;
      for (int k = 0; k < 4; ++k)
        parts += elbo_svgp_minibatch(q, model, std::span<const Eigen::Index>(perm.data() + 5 * k, 5), v);
      worst = std::max({worst, std::abs(singles / 20 - exact), std::abs(parts / 4 - exact)});
    }
  }
  Outcome o;
  o.pass = worst < 1e-9;
  o.detail = fmt("N = 20: singleton and size-5 partition averages vs full bound, both penalties, "
                 "both parametrizations: max gap %.2e (tol 1e-9)",
                 worst);
  return o;
}

Outcome criterion7(const fs::path& root) {
  ExperimentConfig cfg;
  cfg.name = "snelson";
  cfg.data.generator = "snelson_like";
  cfg.data.n = 40;
  cfg.data.seed = 0;
  cfg.test_fraction = 0.0;
  cfg.validation_fraction = 0.0;
  cfg.methods = {Method::kExact, Method::kSgpr, Method::kSgprNew};
  cfg.train.num_inducing = 7;
  cfg.train.iterations = 10000;
  cfg.output_dir = (root / "snelson").string();
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult res = run_experiment(cfg);
  const auto& ms = res.repeats.at(0).methods;
  for (const auto& m : ms)
    if (!m.fit) return {false, "training failed: " + m.error, {}};
  const FitResult& ex = *ms[0].fit;
  const FitResult& cl = *ms[1].fit;
  const FitResult& nw = *ms[2].fit;
  const double s2 = ex.model.noise_var, sf2 = ex.model.spec.amplitude_sq;
  const double l2 = ex.model.spec.lengthscales[0] * ex.model.spec.lengthscales[0];
  const bool a_noise = std::abs(s2 - 0.0715) <= 0.02;
  const bool a_amp = std::abs(sf2 - 0.712) <= 0.1;
  const bool a_len = std::abs(l2 - 0.597) <= 0.1;
  const bool b1 = nw.model.noise_var < cl.model.noise_var;
  const bool b2 = std::abs(nw.model.noise_var - s2) < std::abs(cl.model.noise_var - s2);
  const bool c = nw.final_bound > cl.final_bound;
  Outcome o;
  // (a) is reported; the criterion makes (b) and (c) the binding checks.
  o.pass = b1 && b2 && c;
  o.detail = fmt("binding (b),(c) %s; (a) %s; %.1f s", (b1 && b2 && c) ? "hold" : "violated",
                 (a_noise && a_amp && a_len) ? "holds" : "FAILS", seconds_since(t0));
  o.notes.push_back(fmt("(a) %s exact GP: noise %.4f (0.0715 +- 0.02 %s), amplitude^2 %.4f (0.712 +- 0.1 %s), "
                        "lengthscale^2 %.4f (0.597 +- 0.1 %s)",
                        (a_noise && a_amp && a_len) ? "PASS" : "FAIL", s2, a_noise ? "ok" : "out",
                        sf2, a_amp ? "ok" : "out", l2, a_len ? "ok" : "out"));
  o.notes.push_back(fmt("(b) %s noise: new %.4f < classic %.4f; |new - exact| %.4f < |classic - exact| %.4f",
                        (b1 && b2) ? "PASS" : "FAIL", nw.model.noise_var, cl.model.noise_var,
                        std::abs(nw.model.noise_var - s2), std::abs(cl.model.noise_var - s2)));
  o.notes.push_back(fmt("(c) %s bound: new %.4f > classic %.4f (exact log marginal %.4f)",
                        c ? "PASS" : "FAIL", nw.final_bound, cl.final_bound, ex.final_bound));
  return o;
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset d = make_poisson_toy(0);
  TrainConfig base;
  base.num_inducing = 6;
  base.iterations = 5000;
  base.log_every = 50;
  TrainConfig classic = base, fresh = base, full = base;
  classic.method = Method::kSvgpPoisson;
  fresh.method = Method::kSvgpPoissonNew;
  full.method = Method::kSvgpPoisson;
  full.inducing_init = "data";
  full.fixed = {"inducing"};
  const FitResult rc = fit(classic, d);
  const FitResult rn = fit(fresh, d);
  const FitResult rf = fit(full, d);
  if (rc.aborted || rn.aborted || rf.aborted) return {false, "a fit stopped early", {}};
  const double v = rn.model.v;
  const bool v_ok = v >= 0.575 && v <= 0.775;
  const bool bound_ok = rn.final_bound >= rc.final_bound;
  double gap_new = 0.0, gap_classic = 0.0;
  const std::size_t k = std::min({rc.trace.size(), rn.trace.size(), rf.trace.size()});
  for (std::size_t i = 0; i < k; ++i) {
    gap_new += std::abs(rn.trace[i].bound - rf.trace[i].bound) / static_cast<double>(k);
    gap_classic += std::abs(rc.trace[i].bound - rf.trace[i].bound) / static_cast<double>(k);
  }
  const bool trace_ok = gap_new < gap_classic;
  Outcome o;
  o.pass = v_ok && bound_ok && trace_ok;
  o.detail = fmt("M = 6, 5000 steps: v = %.4f (in [0.575, 0.775] %s); bound new %.3f >= v=1 %.3f %s; "
                 "mean trace gap to Z = X run %.3f vs %.3f %s; %.1f s",
                 v, v_ok ? "yes" : "NO", rn.final_bound, rc.final_bound, bound_ok ? "yes" : "NO",
                 gap_new, gap_classic, trace_ok ? "closer" : "NOT closer", seconds_since(t0));
  o.notes.push_back(fmt("Z = X full variational run (M = 50, Z fixed): final bound %.3f", rf.final_bound));
  return o;
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset d = make_synthetic_regression(2000, 2, 0.3, 7);
  TrainConfig base;
  base.num_inducing = 20;
  base.batch_size = 100;
  base.epochs = 20;
  base.seed = 0;
  TrainConfig a = base, b = base;
  a.method = Method::kSvgp;
  b.method = Method::kSvgpNew;
  const FitResult ra = fit(a, d);
  const FitResult rb = fit(b, d);
  const bool ok = !ra.aborted && !rb.aborted && rb.final_bound >= ra.final_bound;
  Outcome o;
  o.pass = ok;
  o.detail = fmt("N = 2000, d = 2, M = 20, batch 100, 20 epochs: svgp_new %.3f >= svgp %.3f %s "
                 "(noise %.4f vs %.4f); minibatch unbiasedness covered by 6; %.1f s",
                 rb.final_bound, ra.final_bound, ok ? "yes" : "NO", rb.model.noise_var,
                 ra.model.noise_var, seconds_since(t0));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion10(const fs::path& root) {
  ExperimentConfig cfg;
  cfg.name = "determinism";
  cfg.data.generator = "synthetic";
  cfg.data.n = 120;
  cfg.data.dim = 2;
  cfg.data.seed = 3;
  cfg.repeats = 3;
  cfg.seed = 11;
  cfg.methods = {Method::kExact, Method::kSgprNew, Method::kSvgpNew};
  cfg.train.num_inducing = 8;
  cfg.train.iterations = 200;
  cfg.train.batch_size = 20;
  cfg.train.epochs = 5;
  cfg.jobs = 3;
  cfg.output_dir = (root / "det_a").string();
  const ExperimentResult a = run_experiment(cfg);
  cfg.output_dir = (root / "det_b").string();
  cfg.jobs = 1;
  const ExperimentResult b = run_experiment(cfg);
  int compared = 0, differ = 0;
  for (const auto& f : a.files) {
    const fs::path pa(f);
    if (pa.extension() != ".json") continue;
    ++compared;
    if (slurp(pa) != slurp(fs::path(cfg.output_dir) / pa.filename())) ++differ;
  }
  Outcome o;
  o.pass = compared == 3 && differ == 0;
  o.detail = fmt("two runs (3 concurrent repeats vs sequential): %d JSON files compared, %d differ",
                 compared, differ);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const fs::path root = fs::temp_directory_path() / ("tsgp_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, [&] { return criterion7(root); }},
      {8, criterion8},
      {9, criterion9},
      {10, [&] { return criterion10(root); }},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d  %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    for (const auto& n : o.notes) std::printf("          %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  std::printf("%d criterion(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}
