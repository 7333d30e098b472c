#include <doctest.h>

#include <numeric>

#include "test_support.hpp"
#include "tsgp/stochastic.hpp"

using namespace tsgp;
using namespace tsgp::testing;

namespace {

SparseModel<double> model_of(const RegressionInstance& r) {
  return SparseModel<double>(r.spec, r.noise, r.z, r.x, r.y);
}

GaussianVariational<double> random_q(Rng& rng, Eigen::Index m, bool whitened) {
  GaussianVariational<double> q;
  q.mean = normal_vector(rng, m);
  q.cov_factor = MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    q.cov_factor(j, j) = uniform(rng, 0.2, 1.2);
    for (Eigen::Index i = j + 1; i < m; ++i) q.cov_factor(i, j) = 0.3 * normal_vector(rng, 1)[0];
  }
  q.whitened = whitened;
  return q;
}

// Express a whitened q(eps) as the equivalent unwhitened q(u).
GaussianVariational<double> to_unwhitened(const GaussianVariational<double>& q, const MatrixXd& kuu) {
  const MatrixXd l = Eigen::LLT<MatrixXd>(kuu).matrixL();
  GaussianVariational<double> out;
  out.mean = l * q.mean;
  out.cov_factor = l * q.cov_factor.triangularView<Eigen::Lower>();
  out.whitened = false;
  return out;
}

}  // namespace

TEST_CASE("KL of q(u) matches the dense Gaussian KL") {
  Rng rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    const auto r = random_instance(rng, 5, 4, 1);
    const auto c = build_cache(model_of(r));
    const MatrixXd kuu = jittered_kuu(r.spec, r.z, kDefaultRelativeJitter);
    const auto qw = random_q(rng, 4, true);
    CHECK(std::abs(kl_qu_pu(qw, c.kuu) -
                   dense_gauss_kl(qw.mean, qw.cov(), VectorXd::Zero(4), MatrixXd::Identity(4, 4))) <
          1e-9);
    const auto qu = random_q(rng, 4, false);
    CHECK(std::abs(kl_qu_pu(qu, c.kuu) - dense_gauss_kl(qu.mean, qu.cov(), VectorXd::Zero(4), kuu)) <
          1e-7);
    CHECK(kl_qu_pu(GaussianVariational<double>::prior(4), c.kuu) == doctest::Approx(0.0));
  }
}

TEST_CASE("whitened and unwhitened parametrizations give the same bound") {
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    const auto r = random_instance(rng, 30, 5, 2);
    const auto m = model_of(r);
    const auto c = build_cache(m);
    const MatrixXd kuu = c.kuu.lower * c.kuu.lower.transpose();
    const auto qw = random_q(rng, 5, true);
    const auto qu = to_unwhitened(qw, kuu);
    for (auto v : {PenaltyVariant::kClassic, PenaltyVariant::kNew}) {
      const double bw = elbo_svgp_uncollapsed(qw, m, c, v).value;
      const double bu = elbo_svgp_uncollapsed(qu, m, c, v).value;
      CHECK(std::abs(bw - bu) < 1e-7 * (1.0 + std::abs(bw)));
    }
  }
}

TEST_CASE("latent marginals match dense projection") {
  Rng rng(3);
  const auto r = random_instance(rng, 12, 4, 1);
  const auto c = build_cache(model_of(r));
  const MatrixXd kuu = jittered_kuu(r.spec, r.z, kDefaultRelativeJitter);
  const MatrixXd proj = naive_cov(r.spec, r.x, r.z) * lu_inverse(kuu);
  const auto q = random_q(rng, 4, false);
  const auto lm = latent_marginals(q, c);
  CHECK((lm.mean - proj * q.mean).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((lm.var - (proj * q.cov() * proj.transpose()).diagonal()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("expected Gaussian log likelihood agrees with Monte Carlo") {
  Rng rng(4);
  const auto r = random_instance(rng, 6, 3, 1);
  const auto m = model_of(r);
  const auto c = build_cache(m);
  const auto q = random_q(rng, 3, true);
  const auto lm = latent_marginals(q, c);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const double analytic = expected_gaussian_loglik(q, m, c, i);
    const int draws = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double f = lm.mean[i] + std::sqrt(lm.var[i]) * g(rng);
      const double d = r.y[i] - f;
      const double ll = -0.5 * kLog2Pi - 0.5 * std::log(r.noise) - d * d / (2 * r.noise);
      sum += ll;
      sum2 += ll * ll;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    CHECK(std::abs(mean - analytic) < 5 * se + 1e-12);
  }
  CHECK_THROWS_AS(expected_gaussian_loglik(q, m, c, 6), IndexOutOfRange);
}

TEST_CASE("uncollapsed bound at the optimal q(u) equals the collapsed bound") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto r = random_instance(rng, 40, 1 + rep % 6, 1 + rep % 2);
    const auto m = model_of(r);
    const auto c = build_cache(m);
    const auto qw = optimal_qu_whitened(m, c);
    const double classic = elbo_sgpr(m, c).bound;
    const double fresh = elbo_sgpr_new(m, c).bound;
    CHECK(std::abs(elbo_svgp_uncollapsed(qw, m, c, PenaltyVariant::kClassic).value - classic) <
          1e-7 * (1.0 + std::abs(classic)));
    CHECK(std::abs(elbo_svgp_uncollapsed(qw, m, c, PenaltyVariant::kNew).value - fresh) <
          1e-7 * (1.0 + std::abs(fresh)));
    // Any other q(u) is no better.
    const auto other = random_q(rng, qw.size(), true);
    CHECK(elbo_svgp_uncollapsed(other, m, c, PenaltyVariant::kNew).value <= fresh + 1e-8);
  }
}

TEST_CASE("new penalty never lowers the uncollapsed bound") {
  Rng rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const auto r = random_instance(rng, 25, 3, 1);
    const auto m = model_of(r);
    const auto c = build_cache(m);
    const auto q = random_q(rng, 3, rep % 2 == 0);
    CHECK(elbo_svgp_uncollapsed(q, m, c, PenaltyVariant::kClassic).value <=
          elbo_svgp_uncollapsed(q, m, c, PenaltyVariant::kNew).value + 1e-10);
  }
}

TEST_CASE("minibatch estimates are unbiased") {
  Rng rng(7);
  const auto r = random_instance(rng, 20, 4, 1);
  const auto m = model_of(r);
  const auto full = build_cache(m);
  const auto q = random_q(rng, 4, true);
  for (auto v : {PenaltyVariant::kClassic, PenaltyVariant::kNew}) {
    const double exact = elbo_svgp_uncollapsed(q, m, full, v).value;
    double singles = 0.0;
    for (Eigen::Index i = 0; i < 20; ++i) {
      const std::vector<Eigen::Index> b{i};
      singles += elbo_svgp_minibatch(q, m, std::span<const Eigen::Index>(b), v);
    }
    CHECK(std::abs(singles / 20 - exact) < 1e-8 * (1.0 + std::abs(exact)));

    std::vector<Eigen::Index> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    double parts = 0.0;
    for (int k = 0; k < 4; ++k) {
      const std::span<const Eigen::Index> b(perm.data() + 5 * k, 5);
      parts += elbo_svgp_minibatch(q, m, b, v);
    }
    CHECK(std::abs(parts / 4 - exact) < 1e-8 * (1.0 + std::abs(exact)));
    const std::span<const Eigen::Index> all(perm.data(), perm.size());
    CHECK(std::abs(elbo_svgp_minibatch(q, m, all, v) - exact) < 1e-8 * (1.0 + std::abs(exact)));
  }
  CHECK_THROWS_AS(elbo_svgp_minibatch(q, m, std::span<const Eigen::Index>(), PenaltyVariant::kNew),
                  EmptyBatch);
}

TEST_CASE("uncollapsed input validation") {
  Rng rng(8);
  const auto r = random_instance(rng, 10, 3, 1);
  const auto m = model_of(r);
  const auto c = build_cache(m);
  CHECK_THROWS_AS(elbo_svgp_uncollapsed(random_q(rng, 2, true), m, c, PenaltyVariant::kNew),
                  DimensionMismatch);
  const std::vector<Eigen::Index> rows{0, 1};
  CHECK_THROWS_AS(elbo_svgp_uncollapsed(random_q(rng, 3, true), m, build_cache(m, rows),
                                        PenaltyVariant::kNew),
                  DimensionMismatch);
  auto q = random_q(rng, 3, true);
  q.cov_factor(1, 1) = 0.0;
  CHECK_THROWS_AS(kl_qu_pu(q, c.kuu), InputError);
}

TEST_CASE("report carries the optimal v for the new penalty") {
  Rng rng(9);
  const auto r = random_instance(rng, 15, 2, 1);
  const auto m = model_of(r);
  const auto c = build_cache(m);
  const auto rep = svgp_report(optimal_qu_whitened(m, c), m, c, PenaltyVariant::kNew);
  REQUIRE(rep.v.size() == 15u);
  for (std::size_t i = 0; i < 15; ++i)
    CHECK(rep.v[i] == doctest::Approx(1.0 / (1.0 + c.resid[static_cast<Eigen::Index>(i)] / r.noise)));
  CHECK(rep.bound == doctest::Approx(rep.dtc_term + rep.reg_term - rep.kl_term));
}
