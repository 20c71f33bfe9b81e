#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gsindy/analysis.hpp"

#include "helpers.hpp"

using namespace gsindy;

namespace {

TokenFit linear_fit(std::uint64_t id, double c, double k, double r2 = 0.9) {
  TokenFit f;
  f.token_id = id;
  f.library = polynomial_library(1, 2);
  f.support = SupportMask::Constant(3, 2, true);
  f.coefficients = Eigen::MatrixXd::Zero(3, 2);
  f.coefficients(2, 0) = 1;
  f.coefficients(0, 1) = c;
  f.coefficients(1, 1) = -k;
  f.r2 = r2;
  return f;
}

GestureToken token_ending_at(std::uint64_t id, double x0, double x_end) {
  GestureToken t;
  t.id = id;
  t.position = Eigen::Vector3d(x0, (x0 + x_end) / 2, x_end);
  t.velocity = t.acceleration = Eigen::Vector3d::Zero();
  return t;
}

}  // namespace

TEST_CASE("Hooke score of an undamped linear spring is one") {
  OscillatorParams p;
  p.k = 2000;
  p.target = 0.2;
  p.x0 = 1;
  const auto h = hooke_linearity(token_from_trajectory(integrate({}, p, 0, 0.1, 0.001)));
  CHECK(h.r2h > 0.999);
  CHECK(h.slope == doctest::Approx(-2000.0).epsilon(0.01));
  CHECK(h.intercept == doctest::Approx(400.0).epsilon(0.01));
  CHECK_FALSE(h.degenerate);
  CHECK(hooke_linearity(testing::reference_token()).r2h < 0.5);
}

TEST_CASE("Hooke score by hand") {
  GestureToken t;
  t.position = Eigen::Vector3d(0, 1, 2);
  t.acceleration = Eigen::Vector3d(0, 2, 1);
  t.velocity = Eigen::Vector3d::Zero();
  // Fit a = 0.5 + 0.5 x: SSE = 1.5, SST = 2.
  const auto h = hooke_linearity(t);
  CHECK(h.slope == doctest::Approx(0.5));
  CHECK(h.intercept == doctest::Approx(0.5));
  CHECK(h.r2h == doctest::Approx(0.25));
}

TEST_CASE("constant acceleration is degenerate") {
  GestureToken t;
  t.position = Eigen::Vector3d(0, 1, 2);
  t.acceleration = Eigen::Vector3d::Constant(-3);
  t.velocity = Eigen::Vector3d::Zero();
  const auto h = hooke_linearity(t);
  CHECK(h.degenerate);
  CHECK(std::isnan(h.r2h));
}

TEST_CASE("census fractions") {
  std::vector<HookeScore> s;
  for (double r : {0.99, 0.97, 0.93, 0.5}) {
    HookeScore h;
    h.r2h = r;
    s.push_back(h);
  }
  HookeScore deg;
  deg.degenerate = true;
  s.push_back(deg);
  HookeScore tt;
  tt.channel = Channel::TT;
  tt.r2h = 0.2;
  s.push_back(tt);
  const auto rows = nonlinearity_census(s);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].channel == Channel::LA);
  CHECK(rows[0].n == 4);
  CHECK(rows[0].n_degenerate == 1);
  CHECK(rows[0].fractions[0].above == doctest::Approx(0.5));
  CHECK(rows[0].fractions[0].below == doctest::Approx(0.5));
  CHECK(rows[0].fractions[1].below == doctest::Approx(0.25));
  CHECK(rows[1].fractions[0].below == 1.0);
  CHECK_THROWS_AS(nonlinearity_census(std::vector<HookeScore>{}), Error);
}

TEST_CASE("pearson correlation") {
  const std::vector<double> a{1, 2, 3}, b{2, 4, 7};
  CHECK(pearson(a, b) == doctest::Approx(0.9933992677987828).epsilon(1e-12));
  CHECK(pearson(a, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), Error);
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 1, 1}), Error);
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 2}), Error);
}

TEST_CASE("target pair from a linear fit") {
  // Tv = 400 / 2000 = 0.2, T = 2 Tv - x0 = -0.6
  const auto pair = target_pair(linear_fit(3, 400, 2000), token_ending_at(3, 1.0, -0.55));
  REQUIRE(pair.has_value());
  CHECK(pair->virtual_target == doctest::Approx(0.2));
  CHECK(pair->target == doctest::Approx(-0.6));
  CHECK(pair->empirical == -0.55);
  auto no_const = linear_fit(3, 400, 2000);
  no_const.support(0, 1) = false;
  no_const.coefficients(0, 1) = 0;
  CHECK(target_pair(no_const, token_ending_at(3, 1.0, 0))->virtual_target == 0.0);
  auto no_spring = linear_fit(3, 400, 0);
  CHECK_FALSE(target_pair(no_spring, token_ending_at(3, 1.0, 0)).has_value());
  auto first_order = linear_fit(3, 400, 2000);
  first_order.order = 1;
  CHECK_FALSE(target_pair(first_order, token_ending_at(3, 1.0, 0)).has_value());
}

TEST_CASE("target correlation per channel") {
  std::vector<TokenFit> fits;
  std::vector<GestureToken> tokens;
  const double ends[] = {0.1, 0.5, 0.9, 1.3};
  for (std::uint64_t i = 0; i < 4; ++i) {
    // T = 2 c / k - x0 with x0 = 0; choose c so that T tracks the end point.
    fits.push_back(linear_fit(i, 1000 * (ends[i] + 0.01 * static_cast<double>(i * i)), 2000));
    tokens.push_back(token_ending_at(i, 0.0, ends[i]));
  }
  const auto rows = target_correlation(fits, tokens);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n == 4);
  CHECK(rows[0].r > 0.99);
}

TEST_CASE("percentile exemplars") {
  std::vector<TokenFit> fits;
  const double r2[] = {0.5, 0.9, 0.7, 0.9, 0.1};
  for (std::uint64_t i = 0; i < 5; ++i) fits.push_back(linear_fit(i, 0, 1, r2[i]));
  CHECK(percentile_fit(fits, 100).token_id == 1);
  CHECK(percentile_fit(fits, 1).token_id == 4);
  CHECK(percentile_fit(fits, 50).token_id == 2);
  CHECK(percentile_fit(fits, 80).token_id == 1);
  CHECK_THROWS_AS(percentile_fit(fits, 0), Error);
  CHECK_THROWS_AS(percentile_fit(fits, 101), Error);
  CHECK_THROWS_AS(percentile_fit(std::vector<TokenFit>{}, 50), Error);
}

TEST_CASE("portrait table with and without prediction") {
  const auto tok = testing::reference_token();
  const auto plain = portrait_data(tok);
  CHECK(plain.header == std::vector<std::string>{"x", "v", "a"});
  CHECK(plain.columns.rows() == tok.size());
  Trajectory pred;
  pred.t = tok.timestamps();
  pred.x = tok.position;
  pred.v = tok.velocity;
  const auto both = portrait_data(tok, &pred);
  CHECK(both.header.size() == 6);
  CHECK(both.columns.col(5).isApprox(both.columns.col(2)));
  pred.x.conservativeResize(10);
  CHECK_THROWS_AS(portrait_data(tok, &pred), Error);

  std::stringstream s;
  write_portrait_csv(s, both);
  const auto back = read_portrait_csv(s);
  CHECK(back.header == both.header);
  CHECK(back.columns == both.columns);
}
