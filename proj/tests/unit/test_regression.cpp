#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gsindy/regression.hpp"

using namespace gsindy;

namespace {

// y = 3 + 0 * x1 - 2 * x2 exactly.
struct Problem {
  Eigen::MatrixXd theta;
  Eigen::MatrixXd y;
};

Problem sparse_problem() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1);
  Problem p;
  p.theta.resize(40, 3);
  for (Eigen::Index i = 0; i < 40; ++i) p.theta.row(i) << 1.0, n(rng), n(rng);
  p.y = p.theta * Eigen::Vector3d(3, 0, -2);
  return p;
}

}  // namespace

TEST_CASE("ridge solution matches the normal equations") {
  Eigen::MatrixXd theta(3, 2);
  theta << 1, 0,
           0, 1,
           1, 1;
  Eigen::MatrixXd y(3, 1);
  y << 1, 2, 3;
  // (A'A + I) w = A'y with A'A = [[2,1],[1,2]], A'y = [4,5]
  const auto w = ridge_solve(theta, y, 1.0);
  CHECK(w(0, 0) == doctest::Approx(7.0 / 8.0));
  CHECK(w(1, 0) == doctest::Approx(11.0 / 8.0));
}

TEST_CASE("singular normal equations without ridge") {
  Eigen::MatrixXd theta(3, 2);
  theta << 1, 2,
           2, 4,
           3, 6;
  try {
    ridge_solve(theta, Eigen::MatrixXd::Ones(3, 1), 0.0);
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditioned);
  }
}

TEST_CASE("least squares on support zeroes inactive entries") {
  const auto p = sparse_problem();
  SupportMask s(3, 1);
  s << true, false, true;
  const auto w = least_squares_on_support(p.theta, p.y, s);
  CHECK(w(1, 0) == 0.0);
  CHECK(w(0, 0) == doctest::Approx(3.0));
  CHECK(w(2, 0) == doctest::Approx(-2.0));
}

TEST_CASE("stlsq recovers the planted support") {
  const auto p = sparse_problem();
  auto cfg = OptimizerConfig::stlsq_defaults();
  const auto fit = stlsq(p.theta, p.y, cfg);
  CHECK(fit.support(0, 0));
  CHECK_FALSE(fit.support(1, 0));
  CHECK(fit.support(2, 0));
  CHECK(fit.converged);
  CHECK(fit.coefficients(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.coefficients(2, 0) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("stlsq with a threshold above every coefficient") {
  const auto p = sparse_problem();
  auto cfg = OptimizerConfig::stlsq_defaults();
  cfg.threshold = 10;
  try {
    stlsq(p.theta, p.y, cfg);
    FAIL("expected EmptyModel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyModel);
  }
}

TEST_CASE("stlsq rejects mismatched inputs") {
  CHECK_THROWS_AS(stlsq(Eigen::MatrixXd::Ones(4, 2), Eigen::MatrixXd::Ones(3, 1), OptimizerConfig::stlsq_defaults()),
                  Error);
}

TEST_CASE("optimizer config validation") {
  auto cfg = OptimizerConfig::stlsq_defaults();
  cfg.threshold = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = OptimizerConfig::sr3_defaults();
  cfg.nu = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = OptimizerConfig::stlsq_defaults();
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("fixed equation constraint layout") {
  const auto c = ConstraintSet::fix_equation(3, 2, 0, Eigen::Vector3d(0, 0, 1));
  REQUIRE(c.size() == 3);
  // Equation-major: entries 0..2 belong to equation 0.
  CHECK(c.lhs(2, 2) == 1.0);
  CHECK(c.lhs.row(2).sum() == 1.0);
  CHECK(c.rhs(2) == 1.0);
}

TEST_CASE("sr3 honours equality constraints exactly") {
  const auto p = sparse_problem();
  Eigen::MatrixXd y(p.y.rows(), 2);
  y.col(0) = p.theta.col(2);
  y.col(1) = p.y;
  const auto c = ConstraintSet::fix_equation(3, 2, 0, Eigen::Vector3d(0, 0, 1));
  auto cfg = OptimizerConfig::sr3_defaults();
  const auto fit = sr3_constrained(p.theta, y, cfg, c);
  Eigen::VectorXd flat(6);
  for (Eigen::Index e = 0; e < 2; ++e) flat.segment(e * 3, 3) = fit.coefficients.col(e);
  CHECK((c.lhs * flat - c.rhs).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.coefficients(0, 1) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(fit.coefficients(2, 1) == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("inconsistent constraints are infeasible") {
  const auto p = sparse_problem();
  ConstraintSet c;
  c.lhs = Eigen::MatrixXd::Zero(2, 3);
  c.lhs(0, 0) = 1;
  c.lhs(1, 0) = 1;
  c.rhs = Eigen::Vector2d(1, 2);
  try {
    sr3_constrained(p.theta, p.y, OptimizerConfig::sr3_defaults(), c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::Infeasible || e.kind() == ErrorKind::InvalidArgument));
  }
}

TEST_CASE("threshold sweep prefers the smallest threshold on ties") {
  const std::vector<double> thr{0.1, 0.001, 0.01};
  const auto r = threshold_sweep(std::span<const double>(thr), [](double t) { return t; }, [](double) { return 1.0; });
  CHECK(r.threshold == 0.001);
  CHECK(r.scores.size() == 3);
}

TEST_CASE("threshold sweep ranks non-finite scores lowest") {
  const std::vector<double> thr{0.001, 0.01, 0.1};
  const auto r = threshold_sweep(std::span<const double>(thr), [](double t) { return t; },
                                 [](double t) { return t < 0.05 ? -std::numeric_limits<double>::infinity() : 0.2; });
  CHECK(r.threshold == 0.1);
}

TEST_CASE("threshold sweep skips empty models") {
  const std::vector<double> thr{0.001, 0.01, 0.1};
  const auto r = threshold_sweep(
      std::span<const double>(thr),
      [](double t) {
        if (t > 0.005) throw Error(ErrorKind::EmptyModel, "empty");
        return t;
      },
      [](double) { return 0.5; });
  CHECK(r.threshold == 0.001);
  CHECK(std::isnan(r.scores[2]));
  CHECK_THROWS_AS(threshold_sweep(
                      std::span<const double>(thr),
                      [](double) -> double { throw Error(ErrorKind::EmptyModel, "empty"); }, [](double) { return 0.5; }),
                  Error);
  CHECK_THROWS_AS(threshold_sweep(std::span<const double>(), [](double t) { return t; }, [](double) { return 0.5; }),
                  Error);
}
