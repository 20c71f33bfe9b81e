#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gsindy/analysis.hpp"
#include "gsindy/parallel.hpp"
#include "gsindy/pipeline.hpp"
#include "gsindy/regression.hpp"

using namespace gsindy;

TEST_CASE("virtual target inverts exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double x0 = u(rng), t = u(rng);
    CHECK(actual_target(virtual_target(x0, t), x0) == doctest::Approx(t).epsilon(1e-13).scale(50));
  }
}

TEST_CASE("polynomial library size is a binomial coefficient") {
  const auto binom = [](int n, int k) {
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  for (int arity : {1, 2})
    for (int degree = 1; degree <= 4; ++degree) {
      const auto lib = polynomial_library(degree, arity);
      CHECK(lib.size() == binom(degree + arity, arity));
      CHECK(lib.terms().front().is_constant());
      for (std::size_t i = 1; i < lib.terms().size(); ++i)
        CHECK(term_order_less(lib.terms()[i - 1], lib.terms()[i]));
      CHECK(polynomial_library(degree, arity, false).size() == 1 + arity * degree);
    }
}

TEST_CASE("score of data against itself is exactly one") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(20), v(20);
    for (int i = 0; i < 20; ++i) {
      x(i) = n(rng);
      v(i) = n(rng);
    }
    CHECK(variance_weighted_r2(x, v, x, v) == 1.0);
    const Eigen::VectorXd xm = Eigen::VectorXd::Constant(20, x.mean());
    const Eigen::VectorXd vm = Eigen::VectorXd::Constant(20, v.mean());
    CHECK(std::abs(variance_weighted_r2(x, v, xm, vm)) < 1e-12);
    CHECK(variance_weighted_r2(x, v, xm.array() + 1.0, vm) < 0.0);
  }
}

TEST_CASE("stlsq supports shrink monotonically") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd theta(60, 6);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = n(rng);
    Eigen::VectorXd w(6);
    for (int j = 0; j < 6; ++j) w(j) = (j % 2 == 0) ? n(rng) : 0.01 * n(rng);
    Eigen::MatrixXd y = theta * w;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.01 * n(rng);
    auto cfg = OptimizerConfig::stlsq_defaults();
    cfg.threshold = 0.05;
    try {
      const auto fit = stlsq(theta, y, cfg);
      for (std::size_t k = 1; k < fit.support_path.size(); ++k)
        CHECK((fit.support_path[k].array() && !fit.support_path[k - 1].array()).count() == 0);
      for (Eigen::Index j = 0; j < 6; ++j)
        if (!fit.support(j, 0)) CHECK(fit.coefficients(j, 0) == 0.0);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EmptyModel);
    }
  }
}

TEST_CASE("sr3 satisfies random consistent constraints") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd theta(40, 4), y(40, 2);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = n(rng);
    ConstraintSet c;
    c.lhs.resize(2, 8);
    for (Eigen::Index i = 0; i < c.lhs.size(); ++i) c.lhs.data()[i] = n(rng);
    c.rhs = Eigen::Vector2d(n(rng), n(rng));
    auto cfg = OptimizerConfig::sr3_defaults();
    cfg.threshold = 0.01;
    const auto fit = sr3_constrained(theta, y, cfg, c);
    Eigen::VectorXd flat(8);
    flat << fit.coefficients.col(0), fit.coefficients.col(1);
    CHECK((c.lhs * flat - c.rhs).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("differentiation of a line is exact") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng);
    const Eigen::VectorXd x = a + b * Eigen::VectorXd::LinSpaced(30, 0, 29).array() / 160.0;
    const auto v = differentiate(x, 160);
    CHECK((v.array() - b).abs().maxCoeff() < 1e-9 * (1 + std::abs(b)));
  }
}

TEST_CASE("segmented tokens are bounded by velocity zero crossings") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> f(1.5, 6.0), ph(0, 6.28);
  for (int trial = 0; trial < 30; ++trial) {
    ChannelSignal s;
    s.sample_rate = 160;
    const int n = 321;
    s.position.resize(n);
    const double fa = f(rng), fb = f(rng), p = ph(rng);
    for (int i = 0; i < n; ++i) {
      const double t = i / 160.0;
      s.position(i) = std::sin(2 * std::numbers::pi * fa * t + p) + 0.3 * std::sin(2 * std::numbers::pi * fb * t);
    }
    const auto d = estimate_derivatives(s.position, 160);
    s.velocity = d.velocity;
    s.acceleration = d.acceleration;
    auto tokens = segment(s, {}).tokens;
    filter_tokens(tokens);
    for (const auto& t : tokens) {
      if (t.status != TokenStatus::Kept) continue;
      CHECK(t.starts_at_crossing);
      CHECK(t.ends_at_crossing);
      CHECK(t.duration() <= 0.2 + 1e-12);
      // Interior velocity keeps one sign.
      const auto inner = t.velocity.segment(1, t.size() - 2);
      CHECK((inner.minCoeff() >= -1e-9 || inner.maxCoeff() <= 1e-9));
      CHECK(count_velocity_peaks(t.velocity) < 2);
    }
  }
}

TEST_CASE("parallel map keeps index order and reports the first failure") {
  const auto squares = parallel_map(100, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < 100; ++i) CHECK(squares[i] == i * i);
  try {
    parallel_map(50, 3, [](std::size_t i) -> int {
      if (i == 7 || i == 30) throw Error(ErrorKind::Io, std::to_string(i));
      return 0;
    });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "7");
  }
}

TEST_CASE("fits do not depend on the number of workers") {
  SyntheticSpec spec;
  SyntheticGroup g;
  g.name = "g";
  g.count = 8;
  spec.groups = {g};
  spec.noise = 0.005;
  const auto corpus = generate_synthetic_corpus(spec);
  const auto serial = refit_test(corpus.tokens, fit_token(corpus.tokens[0], FitConfig{}).support, FitConfig{}, 1);
  const auto threaded = refit_test(corpus.tokens, fit_token(corpus.tokens[0], FitConfig{}).support, FitConfig{}, 4);
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].coefficients == threaded[i].coefficients);
}

TEST_CASE("census fractions lie in the unit interval and partition around the cutoff") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<HookeScore> scores(200);
  for (auto& s : scores) {
    s.r2h = u(rng);
    s.channel = kAllChannels[static_cast<std::size_t>(u(rng) * 4) % 4];
  }
  for (const auto& row : nonlinearity_census(scores))
    for (const auto& f : row.fractions) {
      CHECK(f.above >= 0.0);
      CHECK(f.below <= 1.0);
      CHECK(f.above + f.below <= 1.0 + 1e-12);
    }
}
