#include <doctest.h>

#include "gsindy/config.hpp"

using namespace gsindy;

TEST_CASE("sections and typed values") {
  const auto cfg = Config::parse(
      "[discover]\norder = 2\nthresholds = 0.001, 0.01\ncompare = no\n\n[synth.a]\nk = 1000, 3000\n[synth.b]\nk = 5\n");
  const auto d = cfg.section("discover");
  CHECK(d.get_int("order", 0) == 2);
  CHECK(d.get_doubles("thresholds", {}) == std::vector<double>{0.001, 0.01});
  CHECK_FALSE(d.get_bool("compare", true));
  CHECK(d.get_double("alpha", 0.05) == 0.05);
  const auto subs = cfg.subsections("synth");
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].name() == "synth.a");
  CHECK(subs[0].get_range("k", {}).hi == 3000);
  CHECK(subs[1].get_range("k", {}).lo == 5);
  CHECK(cfg.section("analyze").values().empty());
}

TEST_CASE("malformed values name section and key") {
  const auto cfg = Config::parse("[discover]\norder = two\nk = 3, 1\n");
  try {
    cfg.section("discover").get_int("order", 2);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
    CHECK(std::string(e.what()).find("[discover] order") != std::string::npos);
  }
  CHECK_THROWS_AS(cfg.section("discover").get_range("k", {}), Error);
  CHECK_THROWS_AS(cfg.section("discover").get_bool("order", true), Error);
}

TEST_CASE("unknown keys are rejected") {
  const auto cfg = Config::parse("[simulate]\nk = 1\nkk = 2\n");
  CHECK_THROWS_AS(cfg.section("simulate").require_known({"k"}), Error);
  CHECK_NOTHROW(cfg.section("simulate").require_known({"k", "kk"}));
}

TEST_CASE("keys outside a section") {
  CHECK_THROWS_AS(Config::parse("k = 1\n[simulate]\n"), Error);
}

TEST_CASE("syntax errors carry the line") {
  try {
    Config::parse("[simulate]\nk = 1\n[broken\n", "run.ini");
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("run.ini:3") != std::string::npos);
  }
}

TEST_CASE("merge and hash") {
  const auto cfg = Config::parse("[simulate]\nk = 1\nb = 2\n[simulate.x]\nb = 3\n");
  const auto m = ConfigSection::merge(cfg.section("simulate"), cfg.subsections("simulate")[0]);
  CHECK(m.get_double("k", 0) == 1);
  CHECK(m.get_double("b", 0) == 3);
  CHECK(m.name() == "simulate.x");
  CHECK(cfg.hash() == fnv1a("[simulate]\nk = 1\nb = 2\n[simulate.x]\nb = 3\n"));
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("missing config file") {
  CHECK_THROWS_AS(Config::load("/nonexistent/run.ini"), Error);
}

TEST_CASE("empty sections are kept in file order") {
  const auto cfg = Config::parse("[simulate.b]\n[simulate]\nk = 1\n[simulate.a]\n");
  CHECK(cfg.section_names() == std::vector<std::string>{"simulate.b", "simulate", "simulate.a"});
  CHECK(cfg.subsections("simulate").size() == 2);
}

TEST_CASE("inline comments") {
  const auto cfg = Config::parse("[synth] ; corpus\nnoise = 0.01   ; fraction of amplitude\nchannel = TT # tongue tip\n");
  CHECK(cfg.section("synth").get_double("noise", 0) == 0.01);
  CHECK(cfg.section("synth").get_string("channel", "") == "TT");
}
