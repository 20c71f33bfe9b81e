#include "gsindy/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "gsindy/parallel.hpp"

namespace gsindy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Term velocity_term() { return Term({0, 1}); }

Eigen::Index required_velocity_index(const FeatureLibrary& library) {
  const auto idx = library.index_of(velocity_term());
  if (!idx)
    throw Error(ErrorKind::InvalidArgument, "second-order library must contain the x' term");
  return *idx;
}

Eigen::VectorXd unit_velocity_column(const FeatureLibrary& library) {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(library.size());
  col(required_velocity_index(library)) = 1.0;
  return col;
}

// Unregularized least squares on `support`; for second-order models the
// first equation stays pinned to x' = 1.00 x'.
Eigen::MatrixXd refit(const DesignData& dd, const FeatureLibrary& library, int order,
                      SupportMask& support) {
  if (order == 1) return least_squares_on_support(dd.theta, dd.targets, support);
  Eigen::MatrixXd coef(library.size(), 2);
  coef.col(0) = unit_velocity_column(library);
  support.col(0) = coef.col(0).array() != 0.0;
  coef.col(1) = least_squares_on_support(dd.theta, dd.targets.col(1), support.col(1));
  return coef;
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return kNaN;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<Eigen::Index> active_flat(const SupportMask& s) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index e = 0; e < s.cols(); ++e)
    for (Eigen::Index j = 0; j < s.rows(); ++j)
      if (s(j, e)) idx.push_back(e * s.rows() + j);
  return idx;
}

double draw(std::mt19937_64& rng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

void check_range(const Range& r, const std::string& what) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
    throw Error(ErrorKind::InvalidArgument, what + " range must be finite with lo <= hi");
}

}  // namespace

// ---------------------------------------------------------------------------
// Split

void SplitConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorKind::InvalidArgument, "train fraction must lie strictly between 0 and 1");
}

TokenSplit split(std::span<const GestureToken> tokens, const SplitConfig& cfg) {
  cfg.validate();
  TokenSplit out;
  for (std::size_t c = 0; c < std::size(kAllChannels); ++c) {
    std::vector<const GestureToken*> pool;
    for (const auto& t : tokens)
      if (t.channel == kAllChannels[c] && t.status == TokenStatus::Kept) pool.push_back(&t);
    if (pool.empty()) continue;
    std::sort(pool.begin(), pool.end(), [](auto* a, auto* b) { return a->id < b->id; });
    std::mt19937_64 rng(cfg.seed ^ (0x9E3779B97F4A7C15ULL * (c + 1)));
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto n_train =
        static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(pool.size())));
    for (std::size_t i = 0; i < pool.size(); ++i)
      (i < n_train ? out.train : out.test).push_back(*pool[i]);
  }
  auto by_id = [](const GestureToken& a, const GestureToken& b) { return a.id < b.id; };
  std::sort(out.train.begin(), out.train.end(), by_id);
  std::sort(out.test.begin(), out.test.end(), by_id);
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

void FitConfig::validate() const {
  if (order != 1 && order != 2) throw Error(ErrorKind::InvalidArgument, "model order must be 1 or 2");
  if (library.size() == 0) throw Error(ErrorKind::InvalidArgument, "feature library is empty");
  if (library.arity() != order)
    throw Error(ErrorKind::InvalidArgument,
                "library arity " + std::to_string(library.arity()) + " does not match order " +
                    std::to_string(order));
  if (thresholds.empty()) throw Error(ErrorKind::InvalidArgument, "threshold set is empty");
  for (double t : thresholds)
    if (!(t >= 0) || !std::isfinite(t))
      throw Error(ErrorKind::InvalidArgument, "thresholds must be finite and >= 0");
  stlsq.validate();
  sr3.validate();
  if (order == 2) required_velocity_index(library);
}

std::vector<std::vector<std::string>> TokenFit::structure() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(support.cols()));
  for (Eigen::Index e = 0; e < support.cols(); ++e)
    for (Eigen::Index j = 0; j < support.rows(); ++j)
      if (support(j, e)) out[static_cast<std::size_t>(e)].push_back(library.terms()[static_cast<std::size_t>(j)].name());
  return out;
}

DesignData design_data(const GestureToken& token, const FeatureLibrary& library, int order) {
  const Eigen::Index n = token.size();
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "token needs at least 3 samples");
  if (token.velocity.size() != n)
    throw Error(ErrorKind::InvalidArgument, "token velocity length mismatch");
  DesignData dd;
  if (order == 1) {
    dd.states = token.position;
    dd.targets = token.velocity;
  } else if (order == 2) {
    if (token.acceleration.size() != n)
      throw Error(ErrorKind::InvalidArgument, "second-order fit needs token acceleration");
    dd.states.resize(n, 2);
    dd.states << token.position, token.velocity;
    dd.targets.resize(n, 2);
    dd.targets << token.velocity, token.acceleration;
  } else {
    throw Error(ErrorKind::InvalidArgument, "model order must be 1 or 2");
  }
  if (!dd.targets.allFinite())
    throw Error(ErrorKind::NonFiniteInput, "token derivatives contain non-finite samples");
  dd.theta = evaluate(library, dd.states);
  return dd;
}

Trajectory predict(const FeatureLibrary& library, const Eigen::MatrixXd& coefficients, int order,
                   double x0, double v0, std::span<const double> timestamps,
                   const IntegratorOptions& opts) {
  if (coefficients.rows() != library.size() || coefficients.cols() != order || library.arity() != order)
    throw Error(ErrorKind::InvalidArgument, "coefficient matrix does not match library and order");
  const auto n = static_cast<Eigen::Index>(timestamps.size());
  Trajectory out;
  out.t = Eigen::Map<const Eigen::VectorXd>(timestamps.data(), n);
  if (n == 0) {
    out.x.resize(0);
    out.v.resize(0);
    return out;
  }
  const double t0 = timestamps.front();

  if (order == 1) {
    using S = Eigen::Matrix<double, 1, 1>;
    auto rhs = [&](double, const S& s) -> S {
      if (!s.allFinite()) return S::Constant(kNaN);
      return S::Constant(library.evaluate_row<double, 1>(s).dot(coefficients.col(0)));
    };
    const auto states = integrate_dense<double, 1>(rhs, t0, S::Constant(x0), timestamps, opts);
    out.x = states.row(0).transpose();
    out.v.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.v(i) = rhs(0.0, S::Constant(out.x(i)))(0);
    return out;
  }

  using S = PhaseState<double>;
  auto rhs = [&](double, const S& s) -> S {
    if (!s.allFinite()) return S::Constant(kNaN);
    const Eigen::VectorXd row = library.evaluate_row<double, 2>(s);
    return S(row.dot(coefficients.col(0)), row.dot(coefficients.col(1)));
  };
  const auto states = integrate_dense<double, 2>(rhs, t0, S(x0, v0), timestamps, opts);
  out.x = states.row(0).transpose();
  out.v = states.row(1).transpose();
  out.a.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.a(i) = rhs(0.0, S(states.col(i)))(1);
  return out;
}

Trajectory predict(const TokenFit& fit, const GestureToken& token, const IntegratorOptions& opts) {
  if (token.size() == 0) throw Error(ErrorKind::InvalidArgument, "token is empty");
  const Eigen::VectorXd t = token.timestamps();
  const double v0 = token.velocity.size() ? token.velocity(0) : 0.0;
  return predict(fit.library, fit.coefficients, fit.order, token.position(0), v0,
                 std::span<const double>(t.data(), static_cast<std::size_t>(t.size())), opts);
}

double variance_weighted_r2(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& v,
                            const Eigen::Ref<const Eigen::VectorXd>& x_pred,
                            const Eigen::Ref<const Eigen::VectorXd>& v_pred) {
  if (x.size() != v.size() || x_pred.size() != x.size() || v_pred.size() != v.size())
    throw Error(ErrorKind::InvalidArgument, "data and prediction differ in length");
  if (x.size() == 0) throw Error(ErrorKind::InvalidArgument, "cannot score an empty series");
  auto sst = [](const Eigen::Ref<const Eigen::VectorXd>& s) {
    return (s.array() - s.mean()).square().sum();
  };
  // var_i * R2_i summed over signals is proportional to SST_i - SSE_i.
  const double total = sst(x) + sst(v);
  if (!(total > 0)) throw Error(ErrorKind::DegenerateTrack, "data has zero variance");
  const double sse = (x - x_pred).squaredNorm() + (v - v_pred).squaredNorm();
  return (total - sse) / total;
}

double score_prediction(const GestureToken& token, const FeatureLibrary& library,
                        const Eigen::MatrixXd& coefficients, int order,
                        const IntegratorOptions& opts, bool* failed) {
  if (failed) *failed = false;
  const Eigen::VectorXd t = token.timestamps();
  Trajectory pred;
  try {
    pred = predict(library, coefficients, order, token.position(0), token.velocity(0),
                   std::span<const double>(t.data(), static_cast<std::size_t>(t.size())), opts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IntegrationFailure) throw;
    if (failed) *failed = true;
    return -kInf;
  }
  const double r2 = variance_weighted_r2(token.position, token.velocity, pred.x, pred.v);
  if (std::isnan(r2)) {
    if (failed) *failed = true;
    return -kInf;
  }
  return r2;
}

TokenFit fit_token(const GestureToken& token, const FitConfig& cfg) {
  cfg.validate();
  const DesignData dd = design_data(token, cfg.library, cfg.order);
  const Eigen::Index p = cfg.library.size();

  ConstraintSet constraints;
  if (cfg.order == 2) constraints = ConstraintSet::fix_equation(p, 2, 0, unit_velocity_column(cfg.library));

  struct Candidate {
    SparseCoefficients sparse;
    Eigen::MatrixXd coefficients;
    double r2 = -kInf;
    bool failed = false;
  };

  auto fit_at = [&](double threshold) {
    Candidate c;
    if (cfg.order == 1) {
      OptimizerConfig oc = cfg.stlsq;
      oc.threshold = threshold;
      c.sparse = stlsq(dd.theta, dd.targets, oc);
    } else {
      OptimizerConfig oc = cfg.sr3;
      oc.threshold = threshold;
      c.sparse = sr3_constrained(dd.theta, dd.targets, oc, constraints);
    }
    c.coefficients = refit(dd, cfg.library, cfg.order, c.sparse.support);
    c.r2 = score_prediction(token, cfg.library, c.coefficients, cfg.order, cfg.integrator, &c.failed);
    return c;
  };

  auto best = threshold_sweep(std::span<const double>(cfg.thresholds), fit_at,
                              [](const Candidate& c) { return c.r2; });

  TokenFit fit;
  fit.token_id = token.id;
  fit.channel = token.channel;
  fit.speaker = token.speaker;
  fit.order = cfg.order;
  fit.library = cfg.library;
  fit.coefficients = std::move(best.result.coefficients);
  fit.support = std::move(best.result.sparse.support);
  fit.r2 = best.result.r2;
  fit.threshold = best.threshold;
  fit.converged = best.result.sparse.converged;
  fit.iterations = best.result.sparse.iterations;
  fit.integration_failed = best.result.failed;
  fit.optimizer = cfg.order == 1 ? "stlsq" : "sr3";
  fit.sweep_scores = std::move(best.scores);
  return fit;
}

// ---------------------------------------------------------------------------
// Ensembles and refits

EnsembleModel ensemble(std::span<const TokenFit> fits) {
  if (fits.empty()) throw Error(ErrorKind::InvalidArgument, "cannot ensemble an empty set of fits");
  const auto& first = fits.front();
  for (const auto& f : fits)
    if (f.order != first.order || !(f.library == first.library) ||
        f.support.rows() != first.support.rows() || f.support.cols() != first.support.cols())
      throw Error(ErrorKind::InvalidArgument, "fits in an ensemble must share library and order");

  std::map<std::vector<Eigen::Index>, StructureCount> counts;
  for (const auto& f : fits) {
    auto& slot = counts[active_flat(f.support)];
    if (slot.count == 0) slot.support = f.support;
    ++slot.count;
  }

  EnsembleModel out;
  out.order = first.order;
  out.library = first.library;
  out.n_fits = fits.size();
  std::vector<std::pair<std::vector<Eigen::Index>, StructureCount>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });
  for (auto& [key, sc] : ranked) out.histogram.push_back(std::move(sc));
  out.structure = out.histogram.front().support;

  const Eigen::Index p = out.structure.rows();
  const Eigen::Index m = out.structure.cols();
  out.mean_coefficients = Eigen::MatrixXd::Zero(p, m);
  for (Eigen::Index e = 0; e < m; ++e)
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!out.structure(j, e)) continue;
      std::vector<double> vals;
      for (const auto& f : fits)
        if (f.support == out.structure) vals.push_back(f.coefficients(j, e));
      CoefficientStats s;
      s.equation = e;
      s.term = j;
      s.count = vals.size();
      s.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
      double ss = 0;
      for (double v : vals) ss += (v - s.mean) * (v - s.mean);
      s.sd = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
      std::sort(vals.begin(), vals.end());
      s.q05 = quantile(vals, 0.05);
      s.q25 = quantile(vals, 0.25);
      s.q50 = quantile(vals, 0.50);
      s.q75 = quantile(vals, 0.75);
      s.q95 = quantile(vals, 0.95);
      out.mean_coefficients(j, e) = s.mean;
      out.coefficients.push_back(s);
    }
  return out;
}

TokenFit refit_on_support(const GestureToken& token, const SupportMask& support, const FitConfig& cfg) {
  cfg.validate();
  if (support.rows() != cfg.library.size() || support.cols() != cfg.order)
    throw Error(ErrorKind::InvalidArgument, "support does not match library and order");
  const DesignData dd = design_data(token, cfg.library, cfg.order);
  TokenFit fit;
  fit.token_id = token.id;
  fit.channel = token.channel;
  fit.speaker = token.speaker;
  fit.order = cfg.order;
  fit.library = cfg.library;
  fit.support = support;
  fit.coefficients = refit(dd, cfg.library, cfg.order, fit.support);
  fit.threshold = 0;
  fit.converged = true;
  fit.optimizer = "lstsq";
  fit.r2 = score_prediction(token, cfg.library, fit.coefficients, cfg.order, cfg.integrator,
                            &fit.integration_failed);
  return fit;
}

std::vector<TokenFit> refit_test(std::span<const GestureToken> tokens, const SupportMask& structure,
                                 const FitConfig& cfg, std::size_t jobs) {
  return parallel_map(tokens.size(), jobs,
                      [&](std::size_t i) { return refit_on_support(tokens[i], structure, cfg); });
}

// ---------------------------------------------------------------------------
// Library comparison and summaries

std::vector<NamedLibrary> default_comparison_libraries(int order) {
  if (order != 1 && order != 2) throw Error(ErrorKind::InvalidArgument, "model order must be 1 or 2");
  std::vector<NamedLibrary> out;
  for (int d = 1; d <= 4; ++d)
    out.push_back({"poly" + std::to_string(d), polynomial_library(d, order, false)});
  return out;
}

R2Summary summarize_r2(std::span<const double> scores) {
  R2Summary s;
  std::vector<double> finite;
  for (double v : scores) {
    if (std::isfinite(v))
      finite.push_back(v);
    else
      ++s.n_failed;
  }
  s.n = finite.size();
  if (finite.empty()) return s;
  s.mean = std::accumulate(finite.begin(), finite.end(), 0.0) / static_cast<double>(s.n);
  double ss = 0;
  for (double v : finite) ss += (v - s.mean) * (v - s.mean);
  s.sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  s.min = *std::min_element(finite.begin(), finite.end());
  s.max = *std::max_element(finite.begin(), finite.end());
  return s;
}

std::vector<ComparisonRow> library_comparison(std::span<const GestureToken> tokens,
                                              std::span<const NamedLibrary> libraries,
                                              const FitConfig& base, std::size_t jobs) {
  std::vector<ComparisonRow> rows;
  std::vector<double> sorted_thr = base.thresholds;
  std::vector<std::size_t> order(sorted_thr.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sorted_thr[a] < sorted_thr[b]; });

  for (const auto& lib : libraries) {
    FitConfig cfg = base;
    cfg.library = lib.library;
    cfg.validate();
    // Score of every token at every threshold; NaN where no usable model.
    const auto scores = parallel_map(tokens.size(), jobs, [&](std::size_t i) {
      try {
        return fit_token(tokens[i], cfg).sweep_scores;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::Io) throw;
        return std::vector<double>(cfg.thresholds.size(), kNaN);
      }
    });

    for (Channel ch : kAllChannels) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i].channel == ch) members.push_back(i);
      if (members.empty()) continue;

      std::optional<ComparisonRow> best;
      for (std::size_t k : order) {
        std::vector<double> col;
        for (std::size_t i : members) col.push_back(scores[i][k]);
        ComparisonRow row{lib.name, ch, cfg.thresholds[k], summarize_r2(col)};
        if (!best || score_improves(row.summary.mean, best->summary.mean)) best = row;
      }
      rows.push_back(*best);
    }
  }
  return rows;
}

std::vector<FitSummaryRow> summarize_fits(std::span<const TokenFit> fits) {
  std::vector<FitSummaryRow> out;
  for (Channel ch : kAllChannels) {
    std::vector<double> r2;
    double terms = 0;
    for (const auto& f : fits) {
      if (f.channel != ch) continue;
      r2.push_back(f.r2);
      if (f.support.cols() > 0) terms += static_cast<double>(f.support.col(f.support.cols() - 1).count());
    }
    if (r2.empty()) continue;
    out.push_back({ch, summarize_r2(r2), terms / static_cast<double>(r2.size())});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

void SyntheticSpec::validate() const {
  if (!(sample_rate > 0) || !std::isfinite(sample_rate))
    throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
  if (!(noise >= 0) || !std::isfinite(noise))
    throw Error(ErrorKind::InvalidArgument, "noise level must be finite and >= 0");
  for (const auto& g : groups) {
    check_range(g.k, g.name + ".k");
    check_range(g.damping_ratio, g.name + ".damping_ratio");
    check_range(g.cubic_ratio, g.name + ".cubic_ratio");
    check_range(g.target, g.name + ".target");
    check_range(g.amplitude, g.name + ".amplitude");
    if (!(g.k.lo > 0)) throw Error(ErrorKind::InvalidArgument, g.name + ": k must be positive");
    if (g.damping_ratio.lo < 0 || g.cubic_ratio.lo < 0)
      throw Error(ErrorKind::InvalidArgument, g.name + ": ratios must be >= 0");
    if (g.duration && !(*g.duration > 0))
      throw Error(ErrorKind::InvalidArgument, g.name + ": duration must be positive");
  }
}

GestureToken token_from_trajectory(const Trajectory& traj, std::uint64_t id, Channel channel) {
  if (traj.size() < 2) throw Error(ErrorKind::InvalidArgument, "trajectory needs at least 2 samples");
  GestureToken tok;
  tok.id = id;
  tok.channel = channel;
  tok.sample_rate = 1.0 / traj.dt();
  tok.t0 = traj.t(0);
  tok.position = traj.x;
  tok.velocity = traj.v;
  tok.acceleration = differentiate(traj.v, tok.sample_rate);
  return tok;
}

namespace {

// Index of the sample nearest the first velocity sign change after the
// start, or -1 when there is none.
Eigen::Index first_velocity_zero(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 2; i < v.size(); ++i) {
    if (v(i - 1) == 0.0) return i - 1;
    if ((v(i - 1) < 0) != (v(i) < 0) || v(i) == 0.0)
      return std::abs(v(i)) < std::abs(v(i - 1)) ? i : i - 1;
  }
  return -1;
}

Trajectory simulate_half_cycle(const GestureModel& model, const OscillatorParams& p, double dt) {
  double horizon = 8.0 * std::numbers::pi / std::sqrt(p.k);
  for (int attempt = 0; attempt < 4; ++attempt, horizon *= 2) {
    Trajectory full = integrate(model, p, 0.0, horizon, dt);
    const Eigen::Index end = first_velocity_zero(full.v);
    if (end < 0) continue;
    const Eigen::Index n = end + 1;
    Trajectory out;
    out.t = full.t.head(n);
    out.x = full.x.head(n);
    out.v = full.v.head(n);
    out.a = full.a.head(n);
    return out;
  }
  throw Error(ErrorKind::IntegrationFailure, "no velocity zero found for a half-cycle token");
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticCorpus corpus;
  // Noise has its own stream so the noise level never shifts parameter draws.
  std::mt19937_64 rng(spec.seed);
  std::mt19937_64 noise_rng(spec.seed ^ 0xD1B54A32D192ED03ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double dt = 1.0 / spec.sample_rate;
  std::uint64_t id = 0;

  for (const auto& g : spec.groups) {
    for (std::size_t i = 0; i < g.count; ++i, ++id) {
      OscillatorParams p;
      p.k = draw(rng, g.k);
      p.b = draw(rng, g.damping_ratio) * critical_damping(p.k);
      p.d = draw(rng, g.cubic_ratio) * p.k;
      p.target = draw(rng, g.target);
      p.x0 = p.target + draw(rng, g.amplitude);
      p.v0 = 0;

      const GestureModel model{g.form, {}};
      Trajectory traj =
          g.duration ? integrate(model, p, 0.0, *g.duration, dt) : simulate_half_cycle(model, p, dt);

      GestureToken tok = token_from_trajectory(traj, id, spec.channel);
      tok.speaker = g.name;
      if (spec.noise > 0) {
        const double sigma = spec.noise * (tok.position.maxCoeff() - tok.position.minCoeff());
        for (Eigen::Index s = 0; s < tok.size(); ++s) tok.position(s) += sigma * gauss(noise_rng);
      }
      corpus.tokens.push_back(std::move(tok));
      corpus.truth.push_back({id, g.name, g.form, p});
    }
  }
  return corpus;
}

}  // namespace gsindy
