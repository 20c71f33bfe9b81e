#include "gsindy/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "gsindy/csv.hpp"

namespace gsindy {

HookeScore hooke_linearity(const GestureToken& token) {
  const Eigen::Index n = token.size();
  if (n < 3 || token.acceleration.size() != n)
    throw Error(ErrorKind::InvalidArgument, "Hooke score needs at least 3 samples with acceleration");
  const auto& x = token.position;
  const auto& a = token.acceleration;
  if (!x.allFinite() || !a.allFinite())
    throw Error(ErrorKind::NonFiniteInput, "token contains non-finite samples");

  HookeScore s;
  s.token_id = token.id;
  s.channel = token.channel;
  const double xm = x.mean();
  const double am = a.mean();
  const double sxx = (x.array() - xm).square().sum();
  const double sxa = ((x.array() - xm) * (a.array() - am)).sum();
  const double sst = (a.array() - am).square().sum();
  const double scale = a.cwiseAbs().maxCoeff();
  if (!(sst > static_cast<double>(n) * std::pow(1e-12 * scale, 2))) {
    s.degenerate = true;
    s.intercept = am;
    return s;
  }
  s.slope = sxx > 0 ? sxa / sxx : 0.0;
  s.intercept = am - s.slope * xm;
  const double sse = (a.array() - s.intercept - s.slope * x.array()).square().sum();
  s.r2h = 1.0 - sse / sst;
  return s;
}

PortraitTable portrait_data(const GestureToken& token, const Trajectory* prediction) {
  const Eigen::Index n = token.size();
  if (token.velocity.size() != n || token.acceleration.size() != n)
    throw Error(ErrorKind::InvalidArgument, "portrait needs position, velocity and acceleration");
  PortraitTable t;
  t.header = {"x", "v", "a"};
  if (!prediction) {
    t.columns.resize(n, 3);
    t.columns << token.position, token.velocity, token.acceleration;
    return t;
  }
  if (prediction->size() != n || prediction->x.size() != n || prediction->v.size() != n)
    throw Error(ErrorKind::InvalidArgument, "prediction length does not match the token");
  const Eigen::VectorXd pa =
      prediction->has_acceleration() ? prediction->a : differentiate(prediction->v, token.sample_rate);
  t.header.insert(t.header.end(), {"x_pred", "v_pred", "a_pred"});
  t.columns.resize(n, 6);
  t.columns << token.position, token.velocity, token.acceleration, prediction->x, prediction->v, pa;
  return t;
}

void write_portrait_csv(std::ostream& os, const PortraitTable& table) {
  csv::write_row(os, table.header);
  std::vector<double> row(static_cast<std::size_t>(table.columns.cols()));
  for (Eigen::Index i = 0; i < table.columns.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.columns.cols(); ++j) row[static_cast<std::size_t>(j)] = table.columns(i, j);
    csv::write_row(os, row);
  }
}

void write_portrait_csv(const std::filesystem::path& path, const PortraitTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_portrait_csv(out, table);
}

PortraitTable read_portrait_csv(std::istream& is) {
  const auto table = csv::read(is, "portrait");
  PortraitTable t;
  t.header = table.header;
  t.columns.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.header.size(); ++j)
      t.columns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i][j];
  return t;
}

std::vector<CensusRow> nonlinearity_census(std::span<const HookeScore> scores,
                                           std::span<const double> cutoffs) {
  if (scores.empty()) throw Error(ErrorKind::InvalidArgument, "census needs at least one score");
  std::vector<CensusRow> out;
  for (Channel ch : kAllChannels) {
    CensusRow row;
    row.channel = ch;
    std::vector<double> vals;
    bool present = false;
    for (const auto& s : scores) {
      if (s.channel != ch) continue;
      present = true;
      if (s.degenerate || std::isnan(s.r2h))
        ++row.n_degenerate;
      else
        vals.push_back(s.r2h);
    }
    if (!present) continue;
    row.n = vals.size();
    for (double c : cutoffs) {
      CensusFraction f{c, 0, 0};
      if (!vals.empty()) {
        const auto above = std::count_if(vals.begin(), vals.end(), [c](double v) { return v > c; });
        const auto below = std::count_if(vals.begin(), vals.end(), [c](double v) { return v < c; });
        f.above = static_cast<double>(above) / static_cast<double>(vals.size());
        f.below = static_cast<double>(below) / static_cast<double>(vals.size());
      }
      row.fractions.push_back(f);
    }
    out.push_back(std::move(row));
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "correlation series differ in length");
  if (a.size() < 2) throw Error(ErrorKind::InvalidArgument, "correlation is undefined for fewer than 2 pairs");
  const Eigen::Map<const Eigen::VectorXd> x(a.data(), static_cast<Eigen::Index>(a.size()));
  const Eigen::Map<const Eigen::VectorXd> y(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (!(sxx > 0) || !(syy > 0))
    throw Error(ErrorKind::InvalidArgument, "correlation is undefined for a constant series");
  return (dx * dy).sum() / std::sqrt(sxx * syy);
}

std::optional<TargetPair> target_pair(const TokenFit& fit, const GestureToken& token) {
  if (fit.order != 2 || fit.coefficients.cols() != 2 || token.size() == 0) return std::nullopt;
  const auto ci = fit.library.index_of(Term::constant(2));
  const auto xi = fit.library.index_of(Term({1, 0}));
  if (!ci || !xi) return std::nullopt;
  const double k = -fit.coefficients(*xi, 1);
  const double c = fit.coefficients(*ci, 1);
  if (k == 0.0 || !std::isfinite(k) || !std::isfinite(c)) return std::nullopt;
  TargetPair tp;
  tp.token_id = token.id;
  tp.channel = token.channel;
  tp.virtual_target = c / k;
  tp.target = actual_target(tp.virtual_target, token.position(0));
  tp.empirical = token.position(token.size() - 1);
  return tp;
}

std::vector<CorrelationRow> target_correlation(std::span<const TokenFit> fits,
                                               std::span<const GestureToken> tokens) {
  std::map<std::uint64_t, const GestureToken*> by_id;
  for (const auto& t : tokens) by_id[t.id] = &t;

  std::vector<CorrelationRow> out;
  for (Channel ch : kAllChannels) {
    CorrelationRow row;
    row.channel = ch;
    std::vector<double> t_abs, x_abs;
    bool present = false;
    for (const auto& f : fits) {
      if (f.channel != ch) continue;
      present = true;
      const auto it = by_id.find(f.token_id);
      const auto tp = it == by_id.end() ? std::nullopt : target_pair(f, *it->second);
      if (!tp) {
        ++row.skipped;
        continue;
      }
      t_abs.push_back(std::abs(tp->target));
      x_abs.push_back(std::abs(tp->empirical));
    }
    if (!present) continue;
    row.n = t_abs.size();
    row.r = pearson(t_abs, x_abs);
    out.push_back(row);
  }
  return out;
}

const TokenFit& percentile_fit(std::span<const TokenFit> fits, double p) {
  if (!(p > 0 && p <= 100)) throw Error(ErrorKind::InvalidArgument, "percentile must lie in (0, 100]");
  std::vector<const TokenFit*> ranked;
  for (const auto& f : fits)
    if (!std::isnan(f.r2)) ranked.push_back(&f);
  if (ranked.empty()) throw Error(ErrorKind::InvalidArgument, "no scored fits to rank");
  std::sort(ranked.begin(), ranked.end(), [](const TokenFit* a, const TokenFit* b) {
    if (a->r2 != b->r2) return a->r2 < b->r2;
    return a->token_id < b->token_id;
  });
  const auto n = static_cast<double>(ranked.size());
  const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(p / 100.0 * n - 1e-9)));
  const double value = ranked[rank - 1]->r2;
  // Lowest id among fits sharing the selected score.
  const auto first = std::find_if(ranked.begin(), ranked.end(),
                                  [value](const TokenFit* f) { return f->r2 == value; });
  return **first;
}

}  // namespace gsindy
