#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "sbwalk/covariance.hpp"
#include "sbwalk/rng.hpp"
#include "sbwalk/walk.hpp"

using namespace sbwalk;

namespace {

Eigen::VectorXd random_unit(RandomStream& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.next_gaussian();
  v.normalize();
  return v;
}

// Independent oracle: E[exp(X^2/(4Lc))] for X ~ N(0, sigma2) by Simpson
// quadrature of the explicit integrand.
double quadrature_moment(double sigma2, double Lc) {
  const double sigma = std::sqrt(sigma2);
  const double a = -40.0 * sigma, b = 40.0 * sigma;
  const int steps = 40000;  // even
  const double h = (b - a) / steps;
  auto f = [&](double x) {
    return std::exp(x * x / (4.0 * Lc)) *
           std::exp(-x * x / (2.0 * sigma2)) /
           std::sqrt(2.0 * M_PI * sigma2);
  };
  double sum = f(a) + f(b);
  for (int i = 1; i < steps; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("gaussian_quadratic_moment closed form") {
  const double Lc = 100.0;
  CHECK(gaussian_quadratic_moment(0.0, Lc) == 1.0);
  CHECK(gaussian_quadratic_moment(Lc, Lc) ==
        doctest::Approx(1.4142135623730951).epsilon(1e-15));
  CHECK(gaussian_quadratic_moment(Lc / 2.0, Lc) ==
        doctest::Approx(1.1547005383792515).epsilon(1e-15));
}

TEST_CASE("gaussian_quadratic_moment agrees with quadrature") {
  const double Lc = 37.5;
  for (double sigma2 : {1.0, 10.0, Lc / 2.0, Lc, 1.5 * Lc}) {
    CHECK(gaussian_quadratic_moment(sigma2, Lc) ==
          doctest::Approx(quadrature_moment(sigma2, Lc)).epsilon(1e-9));
  }
}

TEST_CASE("gaussian_quadratic_moment input validation") {
  CHECK_THROWS_AS(gaussian_quadratic_moment(1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(gaussian_quadratic_moment(-1.0, 10.0), ValidationError);
  CHECK_THROWS_AS(gaussian_quadratic_moment(20.0, 10.0), ValidationError);
  CHECK_THROWS_AS(gaussian_quadratic_moment(25.0, 10.0), ValidationError);
}

TEST_CASE("covariance_step equals the dense formula") {
  RandomStream rng(31);
  const int n = 6;
  const double c = 5.0, L = kSpreadConstant;
  // Build a random PSD M well inside [0, Lc].
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = rng.next_gaussian();
  Eigen::MatrixXd M = B * B.transpose();
  M *= 0.5 * L * c / M.norm();

  const Eigen::VectorXd v = random_unit(rng, n);
  const Eigen::MatrixXd got = covariance_step(M, v, c, L);
  const Eigen::MatrixXd P =
      Eigen::MatrixXd::Identity(n, n) - v * v.transpose() / c;
  const Eigen::MatrixXd want = P * M * P + L * v * v.transpose();
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((got - got.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("covariance_step validates its preconditions") {
  const int n = 3;
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd v = Eigen::VectorXd::Unit(n, 0);

  CHECK_THROWS_AS(covariance_step(Z, v, 0.5), ValidationError);  // c < 1
  Eigen::MatrixXd asym = Z;
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(covariance_step(asym, v, 2.0), ValidationError);
  Eigen::MatrixXd indef = Eigen::MatrixXd::Zero(n, n);
  indef(0, 0) = -1.0;
  CHECK_THROWS_AS(covariance_step(indef, v, 2.0), ValidationError);
  const double Lc = kSpreadConstant * 2.0;
  Eigen::MatrixXd big = Eigen::MatrixXd::Identity(n, n) * (Lc + 1.0);
  CHECK_THROWS_AS(covariance_step(big, v, 2.0), ValidationError);
  Eigen::VectorXd long_v = Eigen::VectorXd::Unit(n + 1, 0);
  CHECK_THROWS_AS(covariance_step(Z, long_v, 2.0), ValidationError);
  Eigen::VectorXd heavy = Eigen::VectorXd::Constant(n, 1.0);
  CHECK_THROWS_AS(covariance_step(Z, heavy, 2.0), ValidationError);
}

TEST_CASE("one and two updates from zero have closed forms") {
  const double c = 4.0, L = kSpreadConstant;
  CovarianceTracker tracker(3, c, L);
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(3, 0);

  tracker.update(e1);
  // M_1 = L e1 e1^T exactly.
  CHECK(tracker.matrix()(0, 0) == doctest::Approx(L).epsilon(1e-15));
  CHECK(tracker.matrix().cwiseAbs().sum() == doctest::Approx(L).epsilon(1e-15));
  CHECK(tracker.direction_variance(e1) == doctest::Approx(L).epsilon(1e-15));

  tracker.update(e1);
  // M_2 = L((1 - 1/c)^2 + 1) e1 e1^T.
  const double want = L * ((1.0 - 1.0 / c) * (1.0 - 1.0 / c) + 1.0);
  CHECK(tracker.matrix()(0, 0) == doctest::Approx(want).epsilon(1e-14));
  CHECK(tracker.step() == 2);
}

TEST_CASE("the invariant 0 <= M <= Lc I holds along random runs") {
  RandomStream rng(77);
  for (double c : {1.0, 2.0, 30.0}) {
    CovarianceTracker tracker(5, c);
    const double Lc = kSpreadConstant * c;
    for (int i = 0; i < 128; ++i) {
      tracker.update(random_unit(rng, 5));
      const auto [lo, hi] = tracker.eigenvalue_range();
      CHECK(lo >= -1e-9);
      CHECK(hi <= Lc + 1e-9);
    }
  }
}

TEST_CASE("CovarianceTracker validates construction and inputs") {
  CHECK_THROWS_AS(CovarianceTracker(3, 0.5), ValidationError);
  CovarianceTracker tracker(3, 2.0);
  Eigen::VectorXd wrong = Eigen::VectorXd::Unit(4, 0);
  CHECK_THROWS_AS(tracker.update(wrong), ValidationError);
}
