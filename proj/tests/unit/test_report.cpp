#include <doctest.h>

#include <limits>
#include <sstream>

#include "gsindy/report.hpp"

#include "helpers.hpp"

using namespace gsindy;

TEST_CASE("fit json echoes the recovered equation") {
  const auto fit = fit_token(testing::reference_token(), FitConfig{});
  const Json j = to_json(fit);
  CHECK(j["equations"][0]["lhs"] == "x'");
  CHECK(j["equations"][0]["terms"].size() == 1);
  CHECK(j["equations"][1]["lhs"] == "x''");
  CHECK(j["equations"][1]["terms"][1]["name"] == "x");
  CHECK(j["equations"][1]["terms"][1]["coefficient"].get<double>() == doctest::Approx(-2000.0).epsilon(1e-3));

  const auto back = fit_from_json(j);
  CHECK(back.coefficients == fit.coefficients);
  CHECK(back.support == fit.support);
  CHECK(back.library == fit.library);
  CHECK(back.r2 == fit.r2);
  CHECK(back.threshold == fit.threshold);
}

TEST_CASE("non-finite r2 is written as null") {
  auto fit = fit_token(testing::reference_token(), FitConfig{});
  fit.r2 = -std::numeric_limits<double>::infinity();
  const Json j = to_json(fit);
  CHECK(j["r2"].is_null());
  CHECK(std::isinf(fit_from_json(j).r2));
}

TEST_CASE("fit jsonl skips error records and reports bad lines") {
  testing::TempDir dir;
  const auto fit = fit_token(testing::reference_token(), FitConfig{});
  testing::write_file(dir / "fits.jsonl",
                      to_json(fit).dump() + "\n{\"token_id\":4,\"error\":\"empty model\"}\n\n" + to_json(fit).dump() + "\n");
  CHECK(read_fits_jsonl(dir / "fits.jsonl").size() == 2);
  testing::write_file(dir / "bad.jsonl", to_json(fit).dump() + "\n{not json\n");
  try {
    read_fits_jsonl(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("token set round trip") {
  testing::TempDir dir;
  SyntheticSpec spec;
  SyntheticGroup g;
  g.name = "g";
  g.count = 3;
  spec.groups = {g};
  auto tokens = generate_synthetic_corpus(spec).tokens;
  tokens[1].status = TokenStatus::ExcludedMultipeak;
  tokens[2].channel = Channel::TD;
  write_token_set(dir.path(), tokens, {{"source", "test"}});
  const auto manifest = Json::parse(testing::read_file(dir / "manifest.json"));
  CHECK(manifest["counts"]["kept"] == 2);
  CHECK(manifest["counts"]["excluded_multipeak"] == 1);
  CHECK(manifest["source"] == "test");
  const auto back = read_token_set(dir.path());
  REQUIRE(back.size() == 3);
  CHECK(back[1].status == TokenStatus::ExcludedMultipeak);
  CHECK(back[2].channel == Channel::TD);
  CHECK(back[0].position == tokens[0].position);
  CHECK(back[0].acceleration == tokens[0].acceleration);
  CHECK_THROWS_AS(read_token_set(dir / "missing"), Error);
}

TEST_CASE("two-decimal formatting") {
  CHECK(format_2dp(0.98765) == "0.99");
  CHECK(format_2dp(-0.001) == "0.00");
  CHECK(format_2dp(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_2dp(std::nan("")) == "nan");
}

TEST_CASE("library comparison table is libraries by channels") {
  std::vector<ComparisonRow> rows;
  for (const char* lib : {"poly1", "poly2"})
    for (Channel ch : {Channel::LA, Channel::TT}) {
      ComparisonRow r;
      r.library = lib;
      r.channel = ch;
      r.summary.n = 2;
      r.summary.mean = 0.951;
      r.summary.sd = 0.0449;
      rows.push_back(r);
    }
  rows.back().summary = R2Summary{};
  std::ostringstream s;
  write_comparison_table(s, rows);
  CHECK(s.str() == "library,LA,TT\npoly1,0.95 (0.04),0.95 (0.04)\npoly2,0.95 (0.04),-inf\n");
}

TEST_CASE("fit summary table rows") {
  FitSummaryRow r;
  r.channel = Channel::TR;
  r.summary = summarize_r2(std::vector<double>{0.9, 1.0});
  std::ostringstream s;
  write_fit_summary_table(s, std::vector<FitSummaryRow>{r});
  CHECK(s.str() == "statistic,TR\nmean(R2),0.95\nsd(R2),0.07\nmin(R2),0.90\nmax(R2),1.00\n");
}
