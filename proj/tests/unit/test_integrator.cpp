#include <doctest.h>

#include <cmath>
#include <vector>

#include "gsindy/integrator.hpp"
#include "gsindy/trajectory.hpp"

#include "helpers.hpp"

using namespace gsindy;

TEST_CASE("exponential decay") {
  const std::vector<double> ts{0.5, 1.0, 2.0};
  const auto out = integrate_dense<double, 1>(
      [](double, const Eigen::Matrix<double, 1, 1>& y) { return Eigen::Matrix<double, 1, 1>(-y(0)); }, 0.0,
      Eigen::Matrix<double, 1, 1>(1.0), ts);
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(out(0, static_cast<Eigen::Index>(i)) == doctest::Approx(std::exp(-ts[i])).epsilon(1e-8));
}

TEST_CASE("critically damped oscillator matches the closed form") {
  const auto p = testing::reference_params();
  const auto traj = integrate({}, p, 0, 0.25, 0.001);
  REQUIRE(traj.size() == 251);
  const double w = std::sqrt(p.k);
  for (Eigen::Index i = 0; i < traj.size(); i += 10) {
    const double t = traj.t(i);
    const double x = p.target + (p.x0 - p.target) * (1 + w * t) * std::exp(-w * t);
    CHECK(traj.x(i) == doctest::Approx(x).epsilon(1e-7));
  }
  // Acceleration column is the model right-hand side.
  CHECK(traj.a(0) == doctest::Approx(-1600.0));
}

TEST_CASE("undamped oscillator keeps its amplitude") {
  OscillatorParams p;
  p.k = 400;
  p.x0 = 1;
  const auto traj = integrate({}, p, 0, 1.0, 0.01);
  for (Eigen::Index i = 0; i < traj.size(); ++i)
    CHECK(traj.x(i) == doctest::Approx(std::cos(20 * traj.t(i))).epsilon(1e-6));
}

TEST_CASE("dense output does not depend on the sample grid") {
  const auto p = testing::reference_params();
  const auto coarse = integrate({}, p, 0, 0.2, 0.05);
  const auto fine = integrate({}, p, 0, 0.2, 0.001);
  CHECK(coarse.x(2) == doctest::Approx(fine.x(100)).epsilon(1e-12));
}

TEST_CASE("inactive force leaves the state untouched before onset") {
  auto p = testing::reference_params();
  p.v0 = 0;
  const GestureModel model{ModelForm::Linear, ActivationSchedule::step(0.1, 1.0)};
  const auto traj = integrate(model, p, 0, 0.2, 0.001);
  CHECK(traj.x(50) == p.x0);
  CHECK(traj.a(50) == 0.0);
  CHECK(traj.x(200) < 0.9);
}

TEST_CASE("blow-up raises an integration error") {
  const std::vector<double> ts{0.5, 2.0};
  try {
    integrate_dense<double, 1>(
        [](double, const Eigen::Matrix<double, 1, 1>& y) { return Eigen::Matrix<double, 1, 1>(y(0) * y(0)); }, 0.0,
        Eigen::Matrix<double, 1, 1>(1.0), ts);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.kind() == ErrorKind::IntegrationFailure);
    // The exact solution 1 / (1 - t) blows up at t = 1.
    CHECK(e.last_valid_time() == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("step budget") {
  IntegratorOptions opts;
  opts.max_steps = 3;
  OscillatorParams p;
  p.k = 1e6;
  p.x0 = 1;
  CHECK_THROWS_AS(integrate({}, p, 0, 1.0, 0.01, opts), IntegrationError);
}

TEST_CASE("uniform grid includes the end point") {
  const auto g = uniform_grid(0, 0.25, 0.001);
  CHECK(g.size() == 251);
  CHECK(g.back() == doctest::Approx(0.25));
  CHECK(uniform_grid(0, 0, 0.1).size() == 1);
}

TEST_CASE("trajectory validation") {
  Trajectory t;
  t.t = Eigen::Vector3d(0, 0.1, 0.3);
  t.x = t.v = Eigen::Vector3d::Zero();
  CHECK_THROWS_AS(t.validate(), Error);
  t.t = Eigen::Vector3d(0, 0.1, 0.2);
  CHECK_NOTHROW(t.validate());
  t.v = Eigen::Vector2d::Zero();
  CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("trajectory csv round trip") {
  const auto traj = integrate({}, testing::reference_params(), 0, 0.01, 0.001);
  std::stringstream s;
  write_trajectory_csv(s, traj);
  const auto back = read_trajectory_csv(s);
  CHECK(back.x == traj.x);
  CHECK(back.a == traj.a);
}
