#include "gsindy/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "gsindy/csv.hpp"

namespace gsindy {

namespace fs = std::filesystem;

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or(const Json& j, double fallback) { return j.is_number() ? j.get<double>() : fallback; }

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

Json parse_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": field '" + key + "': " + e.what(), 0);
  }
}

std::vector<std::string> lhs_names(int order) {
  return order == 1 ? std::vector<std::string>{"x'"} : std::vector<std::string>{"x'", "x''"};
}

}  // namespace

// ---------------------------------------------------------------------------
// Fits

Json to_json(const TokenFit& fit) {
  Json j;
  j["token_id"] = fit.token_id;
  j["channel"] = std::string(to_string(fit.channel));
  j["speaker"] = fit.speaker;
  j["order"] = fit.order;
  j["library"] = fit.library.names();
  Json eqs = Json::array();
  const auto lhs = lhs_names(fit.order);
  for (Eigen::Index e = 0; e < fit.coefficients.cols(); ++e) {
    Json terms = Json::array();
    for (Eigen::Index t = 0; t < fit.coefficients.rows(); ++t) {
      if (!fit.support(t, e)) continue;
      terms.push_back({{"name", fit.library.terms()[static_cast<std::size_t>(t)].name()},
                       {"coefficient", fit.coefficients(t, e)}});
    }
    eqs.push_back({{"lhs", lhs[static_cast<std::size_t>(e)]}, {"terms", terms}});
  }
  j["equations"] = eqs;
  j["threshold"] = fit.threshold;
  j["optimizer"] = fit.optimizer;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["r2"] = number_or_null(fit.r2);
  j["integration_failed"] = fit.integration_failed;
  Json sweep = Json::array();
  for (double s : fit.sweep_scores) sweep.push_back(number_or_null(s));
  j["sweep_scores"] = sweep;
  return j;
}

TokenFit fit_from_json(const Json& j) {
  const std::string where = "fit";
  TokenFit fit;
  fit.token_id = field<std::uint64_t>(j, "token_id", where);
  fit.channel = parse_channel(field<std::string>(j, "channel", where));
  fit.speaker = j.value("speaker", "");
  fit.order = field<int>(j, "order", where);
  if (fit.order != 1 && fit.order != 2) throw ParseError("fit: order must be 1 or 2", 0);
  fit.library = FeatureLibrary::custom(field<std::vector<std::string>>(j, "library", where), fit.order);
  const Eigen::Index p = fit.library.size();
  fit.coefficients = Eigen::MatrixXd::Zero(p, fit.order);
  fit.support = SupportMask::Constant(p, fit.order, false);
  const auto& eqs = j.at("equations");
  if (!eqs.is_array() || static_cast<int>(eqs.size()) != fit.order)
    throw ParseError("fit: expected one equation per order", 0);
  for (std::size_t e = 0; e < eqs.size(); ++e) {
    for (const auto& term : eqs[e].at("terms")) {
      const auto idx = fit.library.index_of(Term::parse(field<std::string>(term, "name", where), fit.order));
      if (!idx) throw ParseError("fit: equation term not in library", 0);
      fit.coefficients(*idx, static_cast<Eigen::Index>(e)) = field<double>(term, "coefficient", where);
      fit.support(*idx, static_cast<Eigen::Index>(e)) = true;
    }
  }
  fit.threshold = j.value("threshold", 0.0);
  fit.optimizer = j.value("optimizer", "");
  fit.iterations = j.value("iterations", 0);
  fit.converged = j.value("converged", false);
  fit.r2 = number_or(j.value("r2", Json()), -std::numeric_limits<double>::infinity());
  fit.integration_failed = j.value("integration_failed", false);
  if (j.contains("sweep_scores"))
    for (const auto& s : j["sweep_scores"]) fit.sweep_scores.push_back(number_or(s, std::nan("")));
  return fit;
}

void write_fits_jsonl(const fs::path& path, std::span<const TokenFit> fits) {
  auto out = open_out(path);
  for (const auto& f : fits) out << to_json(f).dump() << '\n';
}

std::vector<TokenFit> read_fits_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::vector<TokenFit> fits;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    try {
      const Json j = Json::parse(line);
      if (j.contains("error")) continue;  // token whose fit failed
      fits.push_back(fit_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return fits;
}

Json to_json(const EnsembleModel& model) {
  Json j;
  j["order"] = model.order;
  j["library"] = model.library.names();
  j["n_fits"] = model.n_fits;
  const auto names = model.library.names();
  const auto lhs = lhs_names(model.order);
  auto structure_json = [&](const SupportMask& s) {
    Json eqs = Json::array();
    for (Eigen::Index e = 0; e < s.cols(); ++e) {
      Json terms = Json::array();
      for (Eigen::Index t = 0; t < s.rows(); ++t)
        if (s(t, e)) terms.push_back(names[static_cast<std::size_t>(t)]);
      eqs.push_back({{"lhs", lhs[static_cast<std::size_t>(e)]}, {"terms", terms}});
    }
    return eqs;
  };
  j["structure"] = structure_json(model.structure);
  Json hist = Json::array();
  for (const auto& h : model.histogram)
    hist.push_back({{"structure", structure_json(h.support)},
                    {"count", h.count},
                    {"fraction", static_cast<double>(h.count) / static_cast<double>(model.n_fits)}});
  j["histogram"] = hist;
  Json eqs = Json::array();
  for (Eigen::Index e = 0; e < model.structure.cols(); ++e) {
    Json terms = Json::array();
    for (const auto& c : model.coefficients) {
      if (c.equation != e) continue;
      terms.push_back({{"name", names[static_cast<std::size_t>(c.term)]},
                       {"coefficient", c.mean},
                       {"count", c.count},
                       {"mean", c.mean},
                       {"sd", c.sd},
                       {"quantiles",
                        {{"5", c.q05}, {"25", c.q25}, {"50", c.q50}, {"75", c.q75}, {"95", c.q95}}}});
    }
    eqs.push_back({{"lhs", lhs[static_cast<std::size_t>(e)]}, {"terms", terms}});
  }
  j["equations"] = eqs;
  return j;
}

// ---------------------------------------------------------------------------
// Tokens

Json token_entry(const GestureToken& token, const std::string& file) {
  return {{"id", token.id},
          {"channel", std::string(to_string(token.channel))},
          {"speaker", token.speaker},
          {"t0", token.t0},
          {"duration", token.duration()},
          {"samples", token.size()},
          {"sample_rate", token.sample_rate},
          {"first_sample", token.first_sample},
          {"starts_at_crossing", token.starts_at_crossing},
          {"ends_at_crossing", token.ends_at_crossing},
          {"status", std::string(to_string(token.status))},
          {"file", file}};
}

void write_token_set(const fs::path& dir, std::span<const GestureToken> tokens, const Json& extra) {
  fs::create_directories(dir / "tokens");
  Json manifest = Json::object();
  std::map<std::string, std::size_t> counts{{"kept", 0},
                                            {"excluded_multipeak", 0},
                                            {"excluded_duration", 0},
                                            {"excluded_edge", 0}};
  Json entries = Json::array();
  for (const auto& tok : tokens) {
    const std::string file = "tokens/" + std::to_string(tok.id) + ".csv";
    auto out = open_out(dir / file);
    csv::write_row(out, std::vector<std::string>{"t", "x", "v", "a"});
    const bool has_a = tok.acceleration.size() == tok.size();
    for (Eigen::Index i = 0; i < tok.size(); ++i)
      csv::write_row(out, std::vector<double>{tok.t0 + static_cast<double>(i) / tok.sample_rate,
                                              tok.position(i), tok.velocity(i),
                                              has_a ? tok.acceleration(i) : std::nan("")});
    entries.push_back(token_entry(tok, file));
    ++counts[std::string(to_string(tok.status))];
  }
  manifest["counts"] = counts;
  manifest["n_tokens"] = tokens.size();
  for (const auto& [k, v] : extra.items()) manifest[k] = v;
  manifest["tokens"] = entries;
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

std::vector<GestureToken> read_token_set(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path))
    throw Error(ErrorKind::InvalidArgument, "no token manifest at " + manifest_path.string());
  const Json manifest = parse_json_file(manifest_path);
  std::vector<GestureToken> tokens;
  for (const auto& e : manifest.at("tokens")) {
    const std::string where = manifest_path.string();
    GestureToken tok;
    tok.id = field<std::uint64_t>(e, "id", where);
    tok.channel = parse_channel(field<std::string>(e, "channel", where));
    tok.speaker = e.value("speaker", "");
    tok.t0 = field<double>(e, "t0", where);
    tok.sample_rate = field<double>(e, "sample_rate", where);
    tok.first_sample = e.value("first_sample", Eigen::Index{0});
    tok.starts_at_crossing = e.value("starts_at_crossing", true);
    tok.ends_at_crossing = e.value("ends_at_crossing", true);
    tok.status = parse_token_status(field<std::string>(e, "status", where));
    const auto table = csv::read(dir / field<std::string>(e, "file", where));
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    const auto cx = table.require_column("x");
    const auto cv = table.require_column("v");
    const auto ca = table.column("a");
    tok.position.resize(n);
    tok.velocity.resize(n);
    if (ca) tok.acceleration.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = table.rows[static_cast<std::size_t>(i)];
      tok.position(i) = row[cx];
      tok.velocity(i) = row[cv];
      if (ca) tok.acceleration(i) = row[*ca];
    }
    if (ca && !tok.acceleration.allFinite()) tok.acceleration = differentiate(tok.velocity, tok.sample_rate);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

Json to_json(const GroundTruth& truth) {
  return {{"token_id", truth.token_id},
          {"group", truth.group},
          {"form", std::string(to_string(truth.form))},
          {"k", truth.params.k},
          {"b", truth.params.b},
          {"d", truth.params.d},
          {"target", truth.params.target},
          {"x0", truth.params.x0},
          {"v0", truth.params.v0}};
}

// ---------------------------------------------------------------------------
// Tables

std::string format_2dp(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

void write_comparison_csv(std::ostream& os, std::span<const ComparisonRow> rows) {
  csv::write_row(os, std::vector<std::string>{"library", "channel", "threshold", "n", "n_failed", "mean",
                                              "sd", "min", "max", "flagged"});
  for (const auto& r : rows) {
    const auto& s = r.summary;
    csv::write_row(os, std::vector<std::string>{
                           r.library, std::string(to_string(r.channel)), csv::format_number(r.threshold),
                           std::to_string(s.n), std::to_string(s.n_failed), csv::format_number(s.mean),
                           csv::format_number(s.sd), csv::format_number(s.min), csv::format_number(s.max),
                           s.flagged() ? "1" : "0"});
  }
}

namespace {

std::vector<Channel> channels_in(auto const& rows) {
  std::vector<Channel> out;
  for (Channel c : kAllChannels)
    for (const auto& r : rows)
      if (r.channel == c) {
        out.push_back(c);
        break;
      }
  return out;
}

}  // namespace

void write_comparison_table(std::ostream& os, std::span<const ComparisonRow> rows) {
  const auto channels = channels_in(rows);
  std::vector<std::string> header{"library"};
  for (Channel c : channels) header.emplace_back(to_string(c));
  csv::write_row(os, header);
  std::vector<std::string> libs;
  for (const auto& r : rows)
    if (std::find(libs.begin(), libs.end(), r.library) == libs.end()) libs.push_back(r.library);
  for (const auto& lib : libs) {
    std::vector<std::string> cells{lib};
    for (Channel c : channels) {
      std::string cell;
      for (const auto& r : rows)
        if (r.library == lib && r.channel == c)
          cell = r.summary.flagged() ? format_2dp(r.summary.mean)
                                     : format_2dp(r.summary.mean) + " (" + format_2dp(r.summary.sd) + ")";
      cells.push_back(cell);
    }
    csv::write_row(os, cells);
  }
}

void write_fit_summary_table(std::ostream& os, std::span<const FitSummaryRow> rows) {
  const auto channels = channels_in(rows);
  std::vector<std::string> header{"statistic"};
  for (Channel c : channels) header.emplace_back(to_string(c));
  csv::write_row(os, header);
  const std::pair<const char*, double R2Summary::*> stats[] = {
      {"mean(R2)", &R2Summary::mean}, {"sd(R2)", &R2Summary::sd}, {"min(R2)", &R2Summary::min},
      {"max(R2)", &R2Summary::max}};
  for (const auto& [label, member] : stats) {
    std::vector<std::string> cells{label};
    for (Channel c : channels)
      for (const auto& r : rows)
        if (r.channel == c) cells.push_back(format_2dp(r.summary.*member));
    csv::write_row(os, cells);
  }
}

void write_fit_summary_csv(std::ostream& os, const std::string& set, std::span<const FitSummaryRow> rows,
                           bool header) {
  if (header)
    csv::write_row(os, std::vector<std::string>{"set", "channel", "n", "n_failed", "mean", "sd", "min", "max",
                                                "mean_terms"});
  for (const auto& r : rows) {
    const auto& s = r.summary;
    csv::write_row(os, std::vector<std::string>{set, std::string(to_string(r.channel)), std::to_string(s.n),
                                                std::to_string(s.n_failed), csv::format_number(s.mean),
                                                csv::format_number(s.sd), csv::format_number(s.min),
                                                csv::format_number(s.max), csv::format_number(r.mean_terms)});
  }
}

Json to_json(std::span<const CensusRow> rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json fr = Json::array();
    for (const auto& f : r.fractions) fr.push_back({{"cutoff", f.cutoff}, {"above", f.above}, {"below", f.below}});
    out.push_back({{"channel", std::string(to_string(r.channel))},
                   {"n", r.n},
                   {"n_degenerate", r.n_degenerate},
                   {"fractions", fr}});
  }
  return out;
}

Json to_json(std::span<const CorrelationRow> rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back({{"channel", std::string(to_string(r.channel))},
                   {"n", r.n},
                   {"skipped", r.skipped},
                   {"r", number_or_null(r.r)}});
  return out;
}

Json to_json(const HookeScore& score) {
  return {{"token_id", score.token_id},
          {"channel", std::string(to_string(score.channel))},
          {"r2h", number_or_null(score.r2h)},
          {"intercept", score.intercept},
          {"slope", score.slope},
          {"degenerate", score.degenerate}};
}

}  // namespace gsindy
