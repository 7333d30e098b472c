#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "test_support.hpp"
#include "tsgp/collapsed.hpp"
#include "tsgp/exact_gp.hpp"

using namespace tsgp;
using namespace tsgp::testing;

namespace {

SparseModel<double> model_of(const RegressionInstance& r, double jitter = kDefaultRelativeJitter) {
  return SparseModel<double>(r.spec, r.noise, r.z, r.x, r.y, jitter);
}

// k_ii - q_ii from dense matrices, clamped like the library.
VectorXd dense_resid(const RegressionInstance& r, double jitter) {
  const MatrixXd q = dense_qff(r.spec, r.x, r.z, jitter);
  return (naive_cov(r.spec, r.x, r.x).diagonal() - q.diagonal()).cwiseMax(0.0);
}

double dense_dtc(const RegressionInstance& r, double jitter) {
  MatrixXd cov = dense_qff(r.spec, r.x, r.z, jitter);
  cov.diagonal().array() += r.noise;
  return dense_mvn_logpdf(r.y, VectorXd::Zero(r.y.size()), cov);
}

}  // namespace

TEST_CASE("Nystrom cache with Z = X is exact") {
  Rng rng(1);
  RegressionInstance r = random_instance(rng, 12, 1, 1);
  r.z = r.x;
  const auto m = model_of(r, 1e-10);
  const auto c = build_cache(m);
  CHECK((c.qdiag - c.kdiag).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(c.resid.maxCoeff() < 1e-7);
  CHECK((c.resid.array() >= 0.0).all());
}

TEST_CASE("rank-one Nystrom cache") {
  const KernelSpec<double> s{KernelFamily::kSqExp, 1.0, VectorXd::Constant(1, 0.8)};
  MatrixXd x(4, 1);
  x << 0.0, 0.5, -1.0, 2.0;
  const VectorXd y = VectorXd::Zero(4);
  const SparseModel<double> m(s, 0.1, x.topRows(1), x, y, 0.0);
  const auto c = build_cache(m);
  CHECK(c.qdiag[0] == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 1; i < 4; ++i) {
    const double k = std::exp(-0.5 * x(i, 0) * x(i, 0) / 0.64);
    CHECK(c.qdiag[i] == doctest::Approx(k * k).epsilon(1e-12));
  }
}

TEST_CASE("Nystrom diagonal matches the dense oracle") {
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    const auto r = random_instance(rng, 30, 5, 2, KernelFamily::kSqExpArd);
    const auto c = build_cache(model_of(r));
    const MatrixXd q = dense_qff(r.spec, r.x, r.z, kDefaultRelativeJitter);
    CHECK((c.qdiag - q.diagonal()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(c.min_raw_resid >= -1e-9);
  }
}

TEST_CASE("minibatch cache rows select training rows") {
  Rng rng(3);
  const auto r = random_instance(rng, 10, 3, 1);
  const auto m = model_of(r);
  const auto full = build_cache(m);
  const std::vector<Eigen::Index> rows{7, 2, 2, 9};
  const auto part = build_cache(m, rows);
  REQUIRE(part.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(part.resid[i] == doctest::Approx(full.resid[rows[i]]).epsilon(1e-12));
  const std::vector<Eigen::Index> bad{10};
  CHECK_THROWS_AS(build_cache(m, bad), IndexOutOfRange);
}

TEST_CASE("collapsed bounds match dense evaluation of their closed forms") {
  Rng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const auto fam = rep % 2 ? KernelFamily::kMatern32 : KernelFamily::kSqExp;
    const auto r = random_instance(rng, 25, 4, 1, fam);
    const auto m = model_of(r);
    const auto c = build_cache(m);
    const VectorXd res = dense_resid(r, kDefaultRelativeJitter);
    const double dtc = dense_dtc(r, kDefaultRelativeJitter);

    const double classic = dtc - res.sum() / (2 * r.noise);
    double newreg = 0.0;
    for (Eigen::Index i = 0; i < res.size(); ++i) newreg += std::log(1.0 + res[i] / r.noise);
    const double fresh = dtc - 0.5 * newreg;
    const double spherical = dtc - 0.5 * 25 * std::log(1.0 + res.sum() / (25 * r.noise));

    const auto rc = elbo_sgpr(m, c);
    const auto rn = elbo_sgpr_new(m, c);
    const auto rs = elbo_sgpr_artemev(m, c);
    CHECK(std::abs(rc.bound - classic) < 1e-8);
    CHECK(std::abs(rn.bound - fresh) < 1e-8);
    CHECK(std::abs(rs.bound - spherical) < 1e-8);
    CHECK(std::abs(rc.dtc_term - dtc) < 1e-8);
    CHECK(rc.bound <= rs.bound + 1e-8);
    CHECK(rs.bound <= rn.bound + 1e-8);
    CHECK(rn.v.size() == 25u);
    CHECK(rs.v_min == doctest::Approx(1.0 / (1.0 + res.sum() / (25 * r.noise))).epsilon(1e-9));
  }
}

TEST_CASE("collapsed bounds equal the exact marginal likelihood when Z = X") {
  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    RegressionInstance r = random_instance(rng, 15, 1, 1);
    r.spec.lengthscales[0] = 0.3;
    r.z = r.x;
    const auto m = model_of(r, 1e-12);
    const auto c = build_cache(m);
    const double exact = exact_log_marginal(ExactGpState<double>(r.spec, r.noise, r.x, r.y));
    for (auto v : {CollapsedVariant::kClassic, CollapsedVariant::kNew, CollapsedVariant::kSpherical})
      CHECK(std::abs(collapsed_report(m, c, v).bound - exact) < 1e-6 * std::abs(exact));
  }
}

TEST_CASE("spherical bound equals the new bound when all residuals are equal") {
  // Widely separated inputs with one inducing point far away: every residual
  // equals the kernel amplitude.
  const KernelSpec<double> s{KernelFamily::kSqExp, 0.9, VectorXd::Constant(1, 0.1)};
  MatrixXd x(5, 1);
  x << 0, 10, 20, 30, 40;
  VectorXd y(5);
  y << 0.1, -0.3, 0.2, 0.5, -0.4;
  MatrixXd z(1, 1);
  z << 1000;
  const SparseModel<double> m(s, 0.2, z, x, y);
  const auto c = build_cache(m);
  CHECK(c.resid.maxCoeff() == c.resid.minCoeff());
  CHECK(std::abs(elbo_sgpr_artemev(m, c).bound - elbo_sgpr_new(m, c).bound) < 1e-10);
}

TEST_CASE("new-minus-classic gap is the sum of per-point terms") {
  Rng rng(6);
  const auto r = random_instance(rng, 40, 3, 2);
  const auto m = model_of(r);
  const auto c = build_cache(m);
  double gap = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double a = c.resid[i] / r.noise;
    const double term = 0.5 * (a - std::log1p(a));
    CHECK(term >= 0.0);
    gap += term;
  }
  CHECK(std::abs((elbo_sgpr_new(m, c).bound - elbo_sgpr(m, c).bound) - gap) < 1e-9);
}

TEST_CASE("bounds are invariant to the order of inducing points") {
  Rng rng(7);
  const auto r = random_instance(rng, 30, 6, 1);
  RegressionInstance p = r;
  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int i = 0; i < 6; ++i) p.z.row(i) = r.z.row(perm[i]);
  const auto m1 = model_of(r);
  const auto m2 = model_of(p);
  const auto c1 = build_cache(m1);
  const auto c2 = build_cache(m2);
  for (auto v : {CollapsedVariant::kClassic, CollapsedVariant::kNew, CollapsedVariant::kSpherical})
    CHECK(std::abs(collapsed_report(m1, c1, v).bound - collapsed_report(m2, c2, v).bound) < 1e-9);
}

TEST_CASE("ordering chain and strictness on random instances") {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(uniform(rng, 0, 90));
    const Eigen::Index mm = 1 + static_cast<Eigen::Index>(uniform(rng, 0, 10));
    const auto r = random_instance(rng, n, mm, 1 + rep % 2, rep % 3 ? KernelFamily::kSqExp : KernelFamily::kMatern32);
    const auto m = model_of(r);
    const auto c = build_cache(m);
    const double f = elbo_sgpr(m, c).bound;
    const double fs = elbo_sgpr_artemev(m, c).bound;
    const double fn = elbo_sgpr_new(m, c).bound;
    const double ex = exact_log_marginal(ExactGpState<double>(r.spec, r.noise, r.x, r.y));
    CHECK(f <= fs + 1e-8);
    CHECK(fs <= fn + 1e-8);
    CHECK(fn <= ex + 1e-8);
    if (c.resid.maxCoeff() > 1e-6) CHECK(f < fn);
  }
}

TEST_CASE("optimal v") {
  VectorXd res(3);
  res << 0.0, 0.25, 1.0;
  NystromCache<double> c;
  c.resid = res;
  c.rows = {0, 1, 2};
  const VectorXd v = optimal_v(c, 0.25);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(0.5));
  CHECK(v[2] == doctest::Approx(0.2));
}

namespace {

// -1/2 {v (1 + r / noise) - log v - 1}
double v_objective(double v, double r, double noise) {
  return -0.5 * (v * (1.0 + r / noise) - std::log(v) - 1.0);
}

double golden_section_max(double lo, double hi, double r, double noise) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
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

}  // namespace

TEST_CASE("closed-form v agrees with golden-section maximization") {
  Rng rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    const double r = uniform(rng, 0.0, 3.0);
    const double noise = uniform(rng, 0.01, 2.0);
    NystromCache<double> c;
    c.resid = VectorXd::Constant(1, r);
    c.rows = {0};
    CHECK(std::abs(optimal_v(c, noise)[0] - golden_section_max(1e-9, 10.0, r, noise)) < 1e-6);
  }
}

TEST_CASE("KL between conditional distributions") {
  CHECK(kl_qfu_pfu(VectorXd(VectorXd::Ones(4))) == 0.0);
  CHECK(kl_qfu_pfu(VectorXd(VectorXd::Constant(1, 0.5))) ==
        doctest::Approx(0.5 * (0.5 + std::log(2.0) - 1.0)).epsilon(1e-14));
  CHECK(kl_qfu_pfu(VectorXd(VectorXd::Constant(1, 0.5))) == doctest::Approx(0.0966).epsilon(1e-3));
  VectorXd bad(2);
  bad << 0.3, 0.0;
  CHECK_THROWS_AS(kl_qfu_pfu(bad), NonPositiveV);

  Rng rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    const MatrixXd r = random_spd(rng, 4);
    VectorXd v(4);
    for (int i = 0; i < 4; ++i) v[i] = uniform(rng, 0.05, 2.0);
    const VectorXd mu = normal_vector(rng, 4);
    const MatrixXd rh = sym_sqrt(r);
    const MatrixXd qcov = rh * v.asDiagonal() * rh;
    CHECK(std::abs(kl_qfu_pfu(v) - dense_gauss_kl(mu, qcov, mu, r)) < 1e-7);
    CHECK(kl_qfu_pfu(v) >= 0.0);
  }
}

TEST_CASE("optimal q(u) matches the Bayesian linear model posterior") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const auto r = random_instance(rng, 20, 3, 1);
    const auto m = model_of(r);
    const auto q = optimal_qu(m, build_cache(m));
    const MatrixXd kuu = jittered_kuu(r.spec, r.z, kDefaultRelativeJitter);
    const MatrixXd phi = naive_cov(r.spec, r.x, r.z) * lu_inverse(kuu);
    const MatrixXd cov = lu_inverse(lu_inverse(kuu) + phi.transpose() * phi / r.noise);
    const VectorXd mean = cov * phi.transpose() * r.y / r.noise;
    CHECK((q.mean - mean).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((q.cov - cov).cwiseAbs().maxCoeff() < 1e-7);
    // Also the closed form written through Lambda.
    const MatrixXd kuf = naive_cov(r.spec, r.z, r.x);
    const MatrixXd lam = kuu + kuf * kuf.transpose() / r.noise;
    CHECK((q.cov - kuu * lu_inverse(lam) * kuu).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("optimal q(u) limits") {
  Rng rng(12);
  RegressionInstance r = random_instance(rng, 15, 3, 1);
  r.y.setZero();
  const auto m = model_of(r);
  const auto q = optimal_qu(m, build_cache(m));
  CHECK(q.mean.cwiseAbs().maxCoeff() == 0.0);

  RegressionInstance big = random_instance(rng, 15, 3, 1);
  big.noise = 1e8;
  const auto mb = model_of(big);
  const auto qb = optimal_qu(mb, build_cache(mb));
  const MatrixXd kuu = jittered_kuu(big.spec, big.z, kDefaultRelativeJitter);
  CHECK((qb.cov - kuu).norm() / kuu.norm() < 1e-4);
}

TEST_CASE("sparse predictive matches the dense closed form") {
  Rng rng(13);
  for (int rep = 0; rep < 5; ++rep) {
    const auto r = random_instance(rng, 20, 3, 1);
    const MatrixXd xs = uniform_matrix(rng, 4, 1, -3, 3);
    const auto m = model_of(r);
    const auto p = sparse_predict(m, optimal_qu(m, build_cache(m)), xs);
    const MatrixXd kuu = jittered_kuu(r.spec, r.z, kDefaultRelativeJitter);
    const MatrixXd kuf = naive_cov(r.spec, r.z, r.x);
    const MatrixXd ksu = naive_cov(r.spec, xs, r.z);
    const MatrixXd lam_inv = lu_inverse(kuu + kuf * kuf.transpose() / r.noise);
    const VectorXd mean = ksu * lam_inv * kuf * r.y / r.noise;
    const MatrixXd cov = naive_cov(r.spec, xs, xs) - ksu * lu_inverse(kuu) * ksu.transpose() +
                         ksu * lam_inv * ksu.transpose();
    CHECK((p.mean - mean).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((p.cov - cov).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("sparse predictive with q(u) = p(u) is the prior") {
  Rng rng(14);
  const auto r = random_instance(rng, 10, 4, 2);
  const MatrixXd xs = uniform_matrix(rng, 3, 2, -3, 3);
  const auto m = model_of(r);
  const MatrixXd kuu = jittered_kuu(r.spec, r.z, kDefaultRelativeJitter);
  const auto p = sparse_predict(m, VectorXd(VectorXd::Zero(4)), kuu, xs);
  CHECK(p.mean.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p.cov - naive_cov(r.spec, xs, xs)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(sparse_predict(m, VectorXd(VectorXd::Zero(3)), kuu, xs), DimensionMismatch);
}

TEST_CASE("sparse predictive with Z = X reproduces exact GP prediction") {
  Rng rng(15);
  RegressionInstance r = random_instance(rng, 12, 1, 1);
  r.spec.lengthscales[0] = 0.4;
  r.z = r.x;
  const MatrixXd xs = uniform_matrix(rng, 5, 1, -3, 3);
  const auto m = model_of(r, 1e-12);
  const auto ps = sparse_predict(m, optimal_qu(m, build_cache(m)), xs, true);
  const auto pe = exact_predict(ExactGpState<double>(r.spec, r.noise, r.x, r.y), xs, true);
  CHECK((ps.mean - pe.mean).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((ps.cov - pe.cov).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("tractable predictive vs the cubic-cost predictive") {
  // q_hc(f*) = integral p(f* | f, u) q(f | u) q(u); built densely from the joint
  // prior over (f, u, f*) at N <= 50. Means coincide and the tractable
  // predictive never has smaller variance.
  Rng rng(16);
  for (int rep = 0; rep < 5; ++rep) {
    RegressionInstance r = random_instance(rng, 10, 3, 2);
    r.spec.lengthscales[0] = 0.9;
    const MatrixXd xs = uniform_matrix(rng, 4, 2, -3, 3);
    const auto m = model_of(r, 0.0);
    const auto c = build_cache(m);
    const auto qu = optimal_qu(m, c);
    const auto tract = sparse_predict(m, qu, xs);

    const Eigen::Index n = 10, mm = 3;
    MatrixXd fu(n + mm, 2);
    fu << r.x, r.z;
    MatrixXd kj = naive_cov(r.spec, fu, fu);
    kj.diagonal().array() += 1e-10;
    const MatrixXd ksj = naive_cov(r.spec, xs, fu);
    const MatrixXd cmat = ksj * lu_inverse(kj);
    const MatrixXd dmat = naive_cov(r.spec, xs, xs) - cmat * ksj.transpose();

    const MatrixXd kuu = naive_cov(r.spec, r.z, r.z);
    const MatrixXd phi = naive_cov(r.spec, r.x, r.z) * lu_inverse(kuu);
    const MatrixXd resid = naive_cov(r.spec, r.x, r.x) - phi * kuu * phi.transpose();
    const MatrixXd rh = sym_sqrt(0.5 * (resid + resid.transpose()));
    const VectorXd v = optimal_v(c, r.noise);
    MatrixXd joint_cov(n + mm, n + mm);
    joint_cov.topLeftCorner(n, n) = phi * qu.cov * phi.transpose() + rh * v.asDiagonal() * rh;
    joint_cov.topRightCorner(n, mm) = phi * qu.cov;
    joint_cov.bottomLeftCorner(mm, n) = qu.cov * phi.transpose();
    joint_cov.bottomRightCorner(mm, mm) = qu.cov;
    VectorXd joint_mean(n + mm);
    joint_mean << phi * qu.mean, qu.mean;
    const VectorXd hc_mean = cmat * joint_mean;
    const MatrixXd hc_cov = dmat + cmat * joint_cov * cmat.transpose();

    CHECK((tract.mean - hc_mean).cwiseAbs().maxCoeff() < 1e-5);
    for (int i = 0; i < 4; ++i) CHECK(tract.cov(i, i) >= hc_cov(i, i) - 1e-6);
  }
}
