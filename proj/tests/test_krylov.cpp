#include <doctest.h>

#include <random>

#include "afflow/krylov.hpp"
#include "oracles.hpp"

using namespace afflow;

namespace {

Mat random_matrix(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

Vec random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

}  // namespace

TEST_CASE("arnoldi collapses for scaled identity") {
  const double alpha = 2.5;
  const LinearOperator op{6, [alpha](const Vec& x) -> Vec { return alpha * x; }};
  std::mt19937_64 rng(1);
  const Vec b = random_vector(6, rng);
  const auto dec = arnoldi(op, b, 5);
  CHECK(dec.m_eff == 1);
  CHECK(dec.hessenberg(0, 0) == doctest::Approx(alpha));
  CHECK(dec.beta == doctest::Approx(b.norm()));
}

TEST_CASE("arnoldi on a diagonal operator spans the full space") {
  Mat d = Vec(Vec::LinSpaced(3, 1.0, 3.0)).asDiagonal();
  const auto op = LinearOperator::from_dense(d);
  const Vec b = Vec::Ones(3) / std::sqrt(3.0);
  const auto dec = arnoldi(op, b, 3);
  CHECK(dec.m_eff == 3);
  CHECK((dec.basis.transpose() * dec.basis - Mat::Identity(3, 3)).norm() < 1e-12);
  CHECK((d * dec.basis - dec.basis * dec.hessenberg).norm() < 1e-10);
}

TEST_CASE("arnoldi relation holds on a random operator") {
  std::mt19937_64 rng(42);
  const Mat a = random_matrix(20, rng);
  const auto op = LinearOperator::from_dense(a);
  const Vec b = random_vector(20, rng);
  const auto dec = arnoldi(op, b, 8);
  REQUIRE(dec.m_eff == 8);
  CHECK((dec.basis.transpose() * dec.basis - Mat::Identity(8, 8)).norm() < 1e-10);
  CHECK((dec.basis.col(0) - b / b.norm()).norm() < 1e-12);
  // relation A Q = Q H exact on all but the last column
  const Mat lhs = a * dec.basis.leftCols(7);
  const Mat rhs = dec.basis * dec.hessenberg.leftCols(7);
  CHECK((lhs - rhs).norm() <= 1e-8 * dec.hessenberg.norm());
  CHECK_THROWS_AS(arnoldi(op, Vec::Zero(20), 4), std::domain_error);
}

TEST_CASE("arnoldi apply is checked for linearity via probes") {
  std::mt19937_64 rng(43);
  const Mat a = random_matrix(12, rng);
  const auto op = LinearOperator::from_dense(a);
  const Vec x = random_vector(12, rng);
  const Vec y = random_vector(12, rng);
  CHECK((op.apply(2.0 * x + 0.5 * y) - (2.0 * op.apply(x) + 0.5 * op.apply(y)))
            .norm() < 1e-10);
}

TEST_CASE("expm_dense basics") {
  CHECK((expm_dense(Mat::Zero(3, 3)) - Mat::Identity(3, 3)).norm() < 1e-15);

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const Mat e = expm_dense(d);
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(e(1, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
  CHECK(std::abs(e(0, 1)) < 1e-14);

  Mat bad(2, 2);
  bad << 1.0, std::nan(""), 0.0, 1.0;
  CHECK_THROWS_AS(expm_dense(bad), std::invalid_argument);
}

TEST_CASE("expm_dense group property on random matrices") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    Mat m = random_matrix(6, rng);
    m *= 5.0 / std::max(1.0, m.norm());
    const Mat prod = expm_dense(m) * expm_dense(-m);
    CHECK((prod - Mat::Identity(6, 6)).norm() < 1e-10);
  }
}

TEST_CASE("expm_dense matches a truncated series for small norms") {
  std::mt19937_64 rng(78);
  Mat m = random_matrix(5, rng);
  m *= 0.5 / m.norm();
  Mat series = Mat::Identity(5, 5);
  Mat term = Mat::Identity(5, 5);
  for (int k = 1; k <= 30; ++k) {
    term = term * m / k;
    series += term;
  }
  CHECK((expm_dense(m) - series).norm() < 1e-13);
}

TEST_CASE("phi_dense values") {
  const auto zero = phi_dense(Mat::Zero(3, 3));
  CHECK((zero.phi_e1 - Vec::Unit(3, 0)).norm() < 1e-14);

  Mat one(1, 1);
  one << 1.0;
  CHECK(phi_dense(one).phi_e1(0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("phi_dense column agrees with the series sum") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 10; ++trial) {
    Mat m = random_matrix(5, rng);
    m /= std::max(1.0, m.norm());
    // sum_k M^k e1 / (k+1)!
    Vec series = Vec::Zero(5);
    Vec term = Vec::Unit(5, 0);
    double factorial = 1.0;
    for (int k = 0; k <= 30; ++k) {
      factorial *= (k + 1);
      series += term / factorial;
      term = m * term;
    }
    CHECK((phi_dense(m).phi_e1 - series).norm() < 1e-12);
  }
}

TEST_CASE("phi_action special cases") {
  const LinearOperator zero{5, [](const Vec& x) -> Vec { return 0.0 * x; }};
  std::mt19937_64 rng(80);
  const Vec b = random_vector(5, rng);
  CHECK((phi_action(zero, b, 2.0, 3) - 2.0 * b).norm() < 1e-12);

  const double alpha = 1.0;
  const LinearOperator ident{5, [alpha](const Vec& x) -> Vec { return alpha * x; }};
  const Vec expected = (std::exp(1.0) - 1.0) * b;
  CHECK((phi_action(ident, b, 1.0, 5) - expected).norm() < 1e-10);
}

TEST_CASE("krylov actions match dense results at full dimension") {
  std::mt19937_64 rng(81);
  const Eigen::Index n = 30;
  Mat a = random_matrix(n, rng);
  a /= 2.0;
  const auto op = LinearOperator::from_dense(a);
  const Vec b = random_vector(n, rng);
  const double t = 1.3;

  const Vec dense_phi = t * phi_apply_dense(t * a, b);
  const Vec krylov_phi = phi_action(op, b, t, static_cast<int>(n));
  CHECK((krylov_phi - dense_phi).norm() < 1e-9 * dense_phi.norm());

  const Vec dense_exp = expm_dense(t * a) * b;
  const Vec krylov_exp = expm_action(op, b, t, static_cast<int>(n));
  CHECK((krylov_exp - dense_exp).norm() < 1e-9 * dense_exp.norm());
}

TEST_CASE("krylov error decreases with subspace dimension") {
  std::mt19937_64 rng(82);
  const Eigen::Index n = 24;
  Mat a = random_matrix(n, rng);
  a *= 10.0 / a.norm();
  const auto op = LinearOperator::from_dense(a);
  const Vec b = random_vector(n, rng);
  const Vec exact = phi_apply_dense(a, b);  // t = 1

  double prev = 1e300;
  for (int m : {2, 4, 6, 8, 10}) {
    const double err = (phi_action(op, b, 1.0, m) - exact).norm();
    CHECK(err <= prev * (1.0 + 1e-10));
    prev = err;
  }
}

TEST_CASE("phi identity links expm and phi actions") {
  std::mt19937_64 rng(83);
  const Eigen::Index n = 16;
  const Mat a = random_matrix(n, rng, 0.4);
  const auto op = LinearOperator::from_dense(a);
  const Vec b = random_vector(n, rng);
  const double t = 0.9;
  const Vec lhs = expm_action(op, b, t, static_cast<int>(n)) - b;
  const Vec rhs = a * phi_action(op, b, t, static_cast<int>(n));
  CHECK((lhs - rhs).norm() < 1e-8);
}

TEST_CASE("dexpm_dense reference values") {
  std::mt19937_64 rng(84);
  const Mat y = random_matrix(4, rng);
  CHECK((dexpm_dense(Mat::Zero(4, 4), y) - y).norm() < 1e-12);

  const Mat x = random_matrix(4, rng, 0.5);
  CHECK((dexpm_dense(x, x) - expm_dense(x) * x).norm() < 1e-10);

  // central finite difference in a random direction
  const Mat dir = random_matrix(4, rng, 0.5);
  const double h = 1e-5;
  const Mat fd = (expm_dense(x + h * dir) - expm_dense(x - h * dir)) / (2.0 * h);
  CHECK((dexpm_dense(x, dir) - fd).norm() < 1e-7);
}
