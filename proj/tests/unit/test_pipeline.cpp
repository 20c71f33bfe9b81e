#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "gsindy/pipeline.hpp"

#include "helpers.hpp"

using namespace gsindy;

namespace {

std::vector<GestureToken> tokens_with_channels(std::initializer_list<std::pair<Channel, int>> groups) {
  std::vector<GestureToken> out;
  std::uint64_t id = 0;
  for (const auto& [ch, n] : groups)
    for (int i = 0; i < n; ++i) {
      GestureToken t;
      t.id = id++;
      t.channel = ch;
      t.position = Eigen::VectorXd::Zero(3);
      out.push_back(t);
    }
  return out;
}

TokenFit fit_with_support(std::uint64_t id, std::initializer_list<bool> eq1, double c = 1.0) {
  TokenFit f;
  f.token_id = id;
  f.library = polynomial_library(1, 2);
  f.support = SupportMask::Zero(3, 2);
  f.support(2, 0) = true;
  f.coefficients = Eigen::MatrixXd::Zero(3, 2);
  f.coefficients(2, 0) = 1;
  Eigen::Index j = 0;
  for (bool b : eq1) {
    f.support(j, 1) = b;
    if (b) f.coefficients(j, 1) = c * static_cast<double>(j + 1);
    ++j;
  }
  f.r2 = 0.99;
  return f;
}

}  // namespace

TEST_CASE("reference token recovers the generating equation") {
  const auto fit = fit_token(testing::reference_token(), FitConfig{});
  CHECK(fit.structure() == std::vector<std::vector<std::string>>{{"x'"}, {"1", "x", "x'"}});
  CHECK(fit.coefficients(2, 0) == 1.0);
  CHECK(fit.coefficients(0, 0) == 0.0);
  CHECK(fit.coefficients(0, 1) == doctest::Approx(400.0).epsilon(1e-3));
  CHECK(fit.coefficients(1, 1) == doctest::Approx(-2000.0).epsilon(1e-3));
  CHECK(fit.coefficients(2, 1) == doctest::Approx(-89.4427191).epsilon(1e-3));
  CHECK(fit.r2 >= 0.999);
  CHECK(fit.sweep_scores.size() == 3);
  CHECK_FALSE(fit.integration_failed);
}

TEST_CASE("first-order fit of an exponential approach") {
  // x' = -10 (x - 0.5)
  Trajectory tr;
  tr.t = Eigen::VectorXd::LinSpaced(101, 0, 0.5);
  tr.x = 0.5 + 0.5 * (-10 * tr.t.array()).exp();
  tr.v = -10 * (tr.x.array() - 0.5);
  auto tok = token_from_trajectory(tr);
  FitConfig cfg;
  cfg.order = 1;
  cfg.library = polynomial_library(2, 1);
  const auto fit = fit_token(tok, cfg);
  CHECK(fit.coefficients(1, 0) == doctest::Approx(-10.0).epsilon(1e-2));
  CHECK(fit.r2 > 0.999);
}

TEST_CASE("fit config validation") {
  FitConfig cfg;
  cfg.library = polynomial_library(2, 1);
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = FitConfig{};
  cfg.library = FeatureLibrary::custom({"1", "x"}, 2);
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = FitConfig{};
  cfg.order = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("token too short to fit") {
  GestureToken t;
  t.position = t.velocity = t.acceleration = Eigen::Vector2d(1, 2);
  CHECK_THROWS_AS(design_data(t, polynomial_library(1, 2), 2), Error);
}

TEST_CASE("variance-weighted score by hand") {
  const Eigen::Vector3d x(0, 1, 2), v(5, 5, 5);
  CHECK(variance_weighted_r2(x, v, x, v) == 1.0);
  CHECK(variance_weighted_r2(x, v, Eigen::Vector3d::Constant(2), v) == doctest::Approx(-1.5));
  CHECK(std::abs(variance_weighted_r2(x, v, Eigen::Vector3d::Constant(1), v)) < 1e-12);
  // Weights follow variance: SST_x = 2, SST_v = 8.
  const Eigen::Vector3d v2(-2, 0, 2);
  CHECK(variance_weighted_r2(x, v2, x, Eigen::Vector3d::Zero()) == doctest::Approx(0.2));
  CHECK_THROWS_AS(variance_weighted_r2(v, v, v, v), Error);
}

TEST_CASE("split is stratified and deterministic") {
  const auto tokens = tokens_with_channels({{Channel::LA, 10}, {Channel::TT, 5}});
  SplitConfig cfg;
  cfg.seed = 11;
  const auto a = split(tokens, cfg);
  const auto b = split(tokens, cfg);
  CHECK(a.train.size() == 12);
  CHECK(a.test.size() == 3);
  std::size_t la = 0;
  for (const auto& t : a.train) la += t.channel == Channel::LA;
  CHECK(la == 8);
  std::set<std::uint64_t> ids;
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].id == b.train[i].id);
    ids.insert(a.train[i].id);
    if (i > 0) CHECK(a.train[i].id > a.train[i - 1].id);
  }
  for (const auto& t : a.test) CHECK(ids.insert(t.id).second);
  cfg.train_fraction = 1.0;
  CHECK_THROWS_AS(split(tokens, cfg), Error);
}

TEST_CASE("split ignores excluded tokens") {
  auto tokens = tokens_with_channels({{Channel::LA, 4}});
  tokens[0].status = TokenStatus::ExcludedEdge;
  const auto s = split(tokens, SplitConfig{});
  CHECK(s.train.size() + s.test.size() == 3);
}

TEST_CASE("ensemble majority and tie rule") {
  std::vector<TokenFit> fits{fit_with_support(0, {true, true, true}), fit_with_support(1, {false, true, true}),
                             fit_with_support(2, {false, true, true}, 3.0), fit_with_support(3, {true, true, true})};
  const auto m = ensemble(fits);
  // Two structures with two fits each: the smaller one wins.
  CHECK_FALSE(m.structure(0, 1));
  CHECK(m.structure(1, 1));
  CHECK(m.histogram.size() == 2);
  CHECK(m.majority_count() == 2);
  CHECK(m.n_fits == 4);
  CHECK(m.mean_coefficients(1, 1) == doctest::Approx(4.0));
  bool found = false;
  for (const auto& c : m.coefficients)
    if (c.equation == 1 && c.term == 1) {
      found = true;
      CHECK(c.count == 2);
      CHECK(c.sd == doctest::Approx(std::sqrt(8.0)));
      CHECK(c.q50 == doctest::Approx(4.0));
    }
  CHECK(found);
  CHECK_THROWS_AS(ensemble(std::vector<TokenFit>{}), Error);
}

TEST_CASE("refit on the free fit's own structure reproduces it") {
  const auto tok = testing::reference_token();
  const auto fit = fit_token(tok, FitConfig{});
  const auto refit = refit_on_support(tok, fit.support, FitConfig{});
  CHECK((refit.coefficients - fit.coefficients).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(refit.r2 == doctest::Approx(fit.r2));
  CHECK(refit.optimizer == "lstsq");
}

TEST_CASE("summary statistics skip non-finite scores") {
  const std::vector<double> s{0.5, 1.0, -std::numeric_limits<double>::infinity(), std::nan("")};
  const auto r = summarize_r2(s);
  CHECK(r.n == 2);
  CHECK(r.n_failed == 2);
  CHECK(r.mean == doctest::Approx(0.75));
  CHECK(r.min == 0.5);
  CHECK(r.max == 1.0);
  CHECK(r.sd == doctest::Approx(std::sqrt(0.125)));
  const auto none = summarize_r2(std::vector<double>{-std::numeric_limits<double>::infinity()});
  CHECK(none.flagged());
  CHECK(std::isinf(none.mean));
}

TEST_CASE("library comparison shape") {
  SyntheticSpec spec;
  SyntheticGroup g;
  g.name = "lin";
  g.count = 4;
  spec.groups = {g};
  const auto corpus = generate_synthetic_corpus(spec);
  const auto libs = default_comparison_libraries(2);
  REQUIRE(libs.size() == 4);
  CHECK(libs[0].name == "poly1");
  const auto rows = library_comparison(corpus.tokens, libs, FitConfig{});
  CHECK(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.channel == Channel::LA);
    CHECK(r.summary.n + r.summary.n_failed == 4);
  }
}

TEST_CASE("synthetic corpus honours counts and seeds") {
  SyntheticSpec spec;
  SyntheticGroup a, b;
  a.name = "a";
  a.count = 3;
  b.name = "b";
  b.form = ModelForm::Cubic;
  b.cubic_ratio = {0.5, 0.9};
  b.count = 2;
  b.duration.reset();
  spec.groups = {a, b};
  spec.seed = 5;
  const auto c1 = generate_synthetic_corpus(spec);
  const auto c2 = generate_synthetic_corpus(spec);
  REQUIRE(c1.tokens.size() == 5);
  CHECK(c1.truth[4].group == "b");
  CHECK(c1.truth[4].params.d >= 0.5 * c1.truth[4].params.k);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(c1.tokens[i].id == i);
    CHECK(c1.tokens[i].position == c2.tokens[i].position);
  }
  // A half-cycle token ends where velocity first reaches zero.
  const auto& h = c1.tokens[4];
  CHECK(std::abs(h.velocity(h.size() - 1)) < std::abs(h.velocity(h.size() / 2)));
}

TEST_CASE("position noise leaves velocity untouched") {
  SyntheticSpec spec;
  SyntheticGroup g;
  g.name = "n";
  g.count = 2;
  spec.groups = {g};
  spec.seed = 9;
  const auto clean = generate_synthetic_corpus(spec);
  spec.noise = 0.01;
  const auto noisy = generate_synthetic_corpus(spec);
  CHECK(noisy.tokens[0].velocity == clean.tokens[0].velocity);
  CHECK(noisy.tokens[0].acceleration == clean.tokens[0].acceleration);
  CHECK(noisy.tokens[0].position != clean.tokens[0].position);
  CHECK(noisy.truth[1].params.k == clean.truth[1].params.k);
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec;
  SyntheticGroup g;
  g.name = "g";
  g.count = 1;
  g.k = {3000, 1000};
  spec.groups = {g};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.groups[0].k = {1000, 3000};
  spec.noise = -1;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("prediction failure scores minus infinity") {
  const auto tok = testing::reference_token();
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(3, 2);
  coef(2, 0) = 1;
  coef(1, 1) = 1e6;  // runaway spring
  bool failed = false;
  IntegratorOptions opts;
  opts.max_steps = 500;
  const double s = score_prediction(tok, polynomial_library(1, 2), coef, 2, opts, &failed);
  CHECK(std::isinf(s));
  CHECK(failed);
}
