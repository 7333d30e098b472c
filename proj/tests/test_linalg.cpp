#include <doctest.h>

#include "test_support.hpp"
#include "tsgp/dual.hpp"
#include "tsgp/linalg.hpp"

using namespace tsgp;
using namespace tsgp::testing;

TEST_CASE("cholesky of the identity is the identity") {
  const auto f = cholesky<double>(MatrixXd::Identity(3, 3), 0.0);
  CHECK((f.lower - MatrixXd::Identity(3, 3)).norm() == 0.0);
  CHECK(f.jitter_applied == 0.0);
}

TEST_CASE("cholesky of a hand-checkable 2x2") {
  MatrixXd a(2, 2);
  a << 4, 2, 2, 3;
  const auto f = cholesky(a, 0.0);
  CHECK(f.lower(0, 0) == doctest::Approx(2.0));
  CHECK(f.lower(0, 1) == 0.0);
  CHECK(f.lower(1, 0) == doctest::Approx(1.0));
  CHECK(f.lower(1, 1) == doctest::Approx(std::sqrt(2.0)));

  VectorXd b(2);
  b << 2, 3;
  const MatrixXd x = solve_triangular(f, b);
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(x(1, 0) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("cholesky reconstructs random SPD matrices") {
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const MatrixXd a = random_spd(rng, 20);
    const auto f = cholesky(a, 0.0);
    const MatrixXd rec = f.lower * f.lower.transpose();
    CHECK((rec - a).norm() / a.norm() < 1e-10);
    CHECK((f.lower.diagonal().array() > 0.0).all());
  }
}

TEST_CASE("cholesky symmetrizes its input") {
  Rng rng(3);
  MatrixXd a = random_spd(rng, 6);
  MatrixXd skewed = a;
  skewed(0, 5) += 1e-3;
  skewed(5, 0) -= 1e-3;
  const auto f = cholesky(skewed, 0.0);
  CHECK((f.lower * f.lower.transpose() - a).norm() / a.norm() < 1e-12);
}

TEST_CASE("jitter escalates until a singular matrix factorizes") {
  // Rank-one PSD matrix: fails without jitter.
  VectorXd v(4);
  v << 1, 2, 3, 4;
  const MatrixXd a = v * v.transpose();
  const auto f = cholesky(a, 0.0);
  CHECK(f.jitter_applied > 0.0);
  CHECK(f.jitter_applied <= 1e-2 * a.diagonal().mean());
  MatrixXd shifted = a;
  shifted.diagonal().array() += f.jitter_applied;
  CHECK((f.lower * f.lower.transpose() - shifted).norm() / shifted.norm() < 1e-8);
}

TEST_CASE("indefinite matrix raises SingularMatrix") {
  MatrixXd a(2, 2);
  a << 1, 0, 0, -5;
  CHECK_THROWS_AS(cholesky(a, 0.0), SingularMatrix);
  CHECK_THROWS_AS(cholesky(MatrixXd(MatrixXd::Zero(2, 3)), 0.0), DimensionMismatch);
  CHECK_THROWS_AS(cholesky(MatrixXd(MatrixXd::Identity(2, 2)), -1.0), InputError);
}

TEST_CASE("triangular solves") {
  const auto id = cholesky<double>(MatrixXd::Identity(4, 4), 0.0);
  Rng rng(5);
  const MatrixXd b = normal_matrix(rng, 4, 3);
  CHECK((solve_triangular(id, b) - b).norm() == 0.0);

  const MatrixXd a = random_spd(rng, 15);
  const auto f = cholesky(a, 0.0);
  const MatrixXd rhs = normal_matrix(rng, 15, 4);
  CHECK((f.lower * solve_triangular(f, rhs) - rhs).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((f.lower.transpose() * solve_triangular(f, rhs, true) - rhs).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(solve_triangular(f, MatrixXd(MatrixXd::Zero(3, 1))), DimensionMismatch);
}

TEST_CASE("logdet") {
  CHECK(logdet(cholesky<double>(MatrixXd::Identity(5, 5), 0.0)) == 0.0);
  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  CHECK(logdet(cholesky(d, 0.0)) == doctest::Approx(std::log(36.0)).epsilon(1e-14));

  Rng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const MatrixXd a = random_spd(rng, 10);
    const auto f = cholesky(a, 0.0);
    CHECK(std::abs(logdet(f) - lu_logdet(a)) < 1e-9);
    // Inverse through two triangular solves.
    const MatrixXd inv = cholesky_solve(f, MatrixXd::Identity(10, 10));
    CHECK(std::abs(logdet(f) + logdet(cholesky(MatrixXd(0.5 * (inv + inv.transpose())), 0.0))) < 1e-7);
  }
}

TEST_CASE("dual numbers differentiate through the factorization") {
  // d/dt log|A + t E| at t = 0 equals tr(A^{-1} E).
  Rng rng(9);
  const MatrixXd a = random_spd(rng, 6);
  MatrixXd e = normal_matrix(rng, 6, 6);
  e = 0.5 * (e + e.transpose());
  using D = Dual<1>;
  Mat<D> ad(6, 6);
  for (Eigen::Index j = 0; j < 6; ++j)
    for (Eigen::Index i = 0; i < 6; ++i) {
      ad(i, j) = D(a(i, j));
      ad(i, j).d[0] = e(i, j);
    }
  const D ld = logdet(cholesky(ad, 0.0));
  CHECK(ld.v == doctest::Approx(lu_logdet(a)).epsilon(1e-12));
  CHECK(ld.d[0] == doctest::Approx((lu_inverse(a) * e).trace()).epsilon(1e-9));
}
