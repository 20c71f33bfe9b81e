#include "gsindy/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gsindy/csv.hpp"

namespace gsindy {

std::string_view to_string(Channel c) noexcept {
  switch (c) {
    case Channel::LA:
      return "LA";
    case Channel::TT:
      return "TT";
    case Channel::TD:
      return "TD";
    case Channel::TR:
      return "TR";
  }
  return "LA";
}

Channel parse_channel(std::string_view name) {
  for (Channel c : kAllChannels)
    if (to_string(c) == name) return c;
  throw Error(ErrorKind::InvalidArgument,
              "unknown channel '" + std::string(name) + "' (expected LA, TT, TD or TR)");
}

std::string_view to_string(TokenStatus s) noexcept {
  switch (s) {
    case TokenStatus::Kept:
      return "kept";
    case TokenStatus::ExcludedMultipeak:
      return "excluded_multipeak";
    case TokenStatus::ExcludedDuration:
      return "excluded_duration";
    case TokenStatus::ExcludedEdge:
      return "excluded_edge";
  }
  return "kept";
}

TokenStatus parse_token_status(std::string_view name) {
  for (TokenStatus s : {TokenStatus::Kept, TokenStatus::ExcludedMultipeak,
                        TokenStatus::ExcludedDuration, TokenStatus::ExcludedEdge})
    if (to_string(s) == name) return s;
  throw Error(ErrorKind::InvalidArgument, "unknown token status '" + std::string(name) + "'");
}

Eigen::VectorXd GestureToken::timestamps() const {
  Eigen::VectorXd t(size());
  for (Eigen::Index i = 0; i < size(); ++i) t(i) = t0 + static_cast<double>(i) / sample_rate;
  return t;
}

// ---------------------------------------------------------------------------
// Recordings

Eigen::Index Recording::samples() const { return tracks.empty() ? 0 : tracks.begin()->second.rows(); }

void Recording::validate() const {
  if (!(sample_rate > 0) || !std::isfinite(sample_rate))
    throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
  const Eigen::Index n = samples();
  for (const auto& [name, track] : tracks)
    if (track.rows() != n)
      throw Error(ErrorKind::InvalidArgument, "pellet track " + name + " has a different length");
  const double span_end = t0 + static_cast<double>(std::max<Eigen::Index>(n - 1, 0)) / sample_rate;
  for (std::size_t i = 0; i < pauses.size(); ++i) {
    const auto& p = pauses[i];
    if (!(p.start <= p.end)) throw Error(ErrorKind::InvalidArgument, "pause with start > end");
    if (i > 0 && p.start < pauses[i - 1].end)
      throw Error(ErrorKind::InvalidArgument, "pause intervals overlap or are unsorted");
    if (n > 0 && (p.start < t0 - 1e-9 || p.end > span_end + 1e-9))
      throw Error(ErrorKind::InvalidArgument, "pause interval lies outside the signal span");
  }
}

std::vector<PauseInterval> read_pauses(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto cs = table.require_column("start");
  const auto ce = table.require_column("end");
  std::vector<PauseInterval> out;
  for (const auto& row : table.rows) out.push_back({row[cs], row[ce]});
  return out;
}

Recording read_recording(const std::filesystem::path& path,
                         const std::optional<std::filesystem::path>& pauses_csv, double sample_rate) {
  const auto table = csv::read(path);
  const auto ct = table.require_column("t");
  Recording rec;
  rec.speaker = path.stem().string();
  rec.sample_rate = sample_rate;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n > 0) rec.t0 = table.rows.front()[ct];

  const double step = 1.0 / sample_rate;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double d = table.rows[static_cast<std::size_t>(i)][ct] - table.rows[static_cast<std::size_t>(i - 1)][ct];
    if (std::abs(d - step) > 0.01 * step) {
      std::ostringstream os;
      os << path.string() << ":" << i + 2 << ": sample spacing " << d << " s does not match "
         << sample_rate << " Hz";
      throw ParseError(os.str(), static_cast<std::size_t>(i + 2));
    }
  }

  for (const char* pellet : {"UL", "LL", "T1", "T3", "T4"}) {
    const auto cx = table.column(std::string(pellet) + "_x");
    const auto cy = table.column(std::string(pellet) + "_y");
    if (!cx || !cy) continue;
    Eigen::MatrixX2d track(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = table.rows[static_cast<std::size_t>(i)];
      track(i, 0) = row[*cx];
      track(i, 1) = row[*cy];
    }
    if (!track.allFinite())
      throw Error(ErrorKind::NonFiniteInput, path.string() + ": non-finite sample in " + pellet);
    rec.tracks.emplace(pellet, std::move(track));
  }
  if (pauses_csv) rec.pauses = read_pauses(*pauses_csv);
  rec.validate();
  return rec;
}

// ---------------------------------------------------------------------------
// Channels

Eigen::VectorXd lip_aperture(const Eigen::Ref<const Eigen::VectorXd>& upper_y,
                             const Eigen::Ref<const Eigen::VectorXd>& lower_y) {
  if (upper_y.size() != lower_y.size())
    throw Error(ErrorKind::InvalidArgument, "lip tracks differ in length");
  return (upper_y - lower_y).cwiseAbs();
}

Eigen::VectorXd pca_first_component(const Eigen::Ref<const Eigen::MatrixX2d>& track) {
  if (track.rows() < 2)
    throw Error(ErrorKind::DegenerateTrack, "principal component needs at least two samples");
  const Eigen::RowVector2d mean = track.colwise().mean();
  const Eigen::MatrixX2d centred = track.rowwise() - mean;
  const Eigen::Matrix2d cov = centred.transpose() * centred / static_cast<double>(track.rows() - 1);
  const double scale = std::max(1.0, mean.cwiseAbs().maxCoeff());
  if (!(cov.trace() > 1e-24 * scale * scale))
    throw Error(ErrorKind::DegenerateTrack, "pellet track has zero variance");

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  Eigen::Vector2d axis = eig.eigenvectors().col(1);  // eigenvalues ascending
  // Covariance of the projection with y is lambda * axis.y, so the sign of
  // axis.y decides the orientation.
  const double tie = 1e-12;
  if (axis(1) < -tie || (std::abs(axis(1)) <= tie && axis(0) < 0)) axis = -axis;
  return centred * axis;
}

Eigen::VectorXd differentiate(const Eigen::Ref<const Eigen::VectorXd>& s, double sample_rate) {
  if (!(sample_rate > 0)) throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
  const Eigen::Index n = s.size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  if (n < 2) return d;
  const double h = 1.0 / sample_rate;
  if (n == 2) {
    d.setConstant((s(1) - s(0)) / h);
    return d;
  }
  // Written as differences so a constant signal differentiates to exactly 0.
  d(0) = (4.0 * (s(1) - s(0)) - (s(2) - s(0))) / (2.0 * h);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d(i) = (s(i + 1) - s(i - 1)) / (2.0 * h);
  d(n - 1) = (4.0 * (s(n - 1) - s(n - 2)) - (s(n - 1) - s(n - 3))) / (2.0 * h);
  return d;
}

Derivatives estimate_derivatives(const Eigen::Ref<const Eigen::VectorXd>& position, double sample_rate) {
  Derivatives out;
  out.velocity = differentiate(position, sample_rate);
  out.acceleration = differentiate(out.velocity, sample_rate);
  return out;
}

ChannelSignal extract_channel(const Recording& rec, Channel channel) {
  auto track = [&](const char* name) -> const Eigen::MatrixX2d& {
    const auto it = rec.tracks.find(name);
    if (it == rec.tracks.end())
      throw Error(ErrorKind::InvalidArgument, std::string("recording ") + rec.speaker +
                                                  " has no " + name + " pellet for channel " +
                                                  std::string(to_string(channel)));
    return it->second;
  };
  ChannelSignal sig;
  sig.channel = channel;
  sig.speaker = rec.speaker;
  sig.sample_rate = rec.sample_rate;
  sig.t0 = rec.t0;
  switch (channel) {
    case Channel::LA:
      sig.position = lip_aperture(track("UL").col(1), track("LL").col(1));
      break;
    case Channel::TT:
      sig.position = pca_first_component(track("T1"));
      break;
    case Channel::TD:
      sig.position = pca_first_component(track("T3"));
      break;
    case Channel::TR:
      sig.position = pca_first_component(track("T4"));
      break;
  }
  auto d = estimate_derivatives(sig.position, sig.sample_rate);
  sig.velocity = std::move(d.velocity);
  sig.acceleration = std::move(d.acceleration);
  return sig;
}

// ---------------------------------------------------------------------------
// Segmentation

std::vector<std::pair<Eigen::Index, Eigen::Index>> inter_pause_intervals(
    Eigen::Index n, double t0, double sample_rate, std::span<const PauseInterval> pauses) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index run_start = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) / sample_rate;
    const bool paused = std::any_of(pauses.begin(), pauses.end(), [&](const PauseInterval& p) {
      return t >= p.start && t <= p.end;
    });
    if (!paused && run_start < 0) run_start = i;
    if (paused && run_start >= 0) {
      out.emplace_back(run_start, i - 1);
      run_start = -1;
    }
  }
  if (run_start >= 0) out.emplace_back(run_start, n - 1);
  return out;
}

namespace {

bool is_zero(double v) { return std::abs(v) < kZeroVelocityTolerance; }

bool sign_change(double a, double b) {
  return !is_zero(a) && !is_zero(b) && ((a < 0) != (b < 0));
}

GestureToken slice_token(const ChannelSignal& sig, Eigen::Index lo, Eigen::Index hi) {
  GestureToken tok;
  tok.channel = sig.channel;
  tok.speaker = sig.speaker;
  tok.sample_rate = sig.sample_rate;
  tok.first_sample = lo;
  tok.t0 = sig.t0 + static_cast<double>(lo) / sig.sample_rate;
  const Eigen::Index len = hi - lo + 1;
  tok.position = sig.position.segment(lo, len);
  tok.velocity = sig.velocity.segment(lo, len);
  if (sig.acceleration.size() == sig.position.size())
    tok.acceleration = sig.acceleration.segment(lo, len);
  return tok;
}

}  // namespace

Segmentation segment(const ChannelSignal& sig, std::span<const PauseInterval> pauses,
                     std::uint64_t first_id) {
  const Eigen::Index n = sig.position.size();
  if (sig.velocity.size() != n)
    throw Error(ErrorKind::InvalidArgument, "position and velocity differ in length");
  const auto& v = sig.velocity;

  Segmentation out;
  std::uint64_t next_id = first_id;
  for (const auto& [lo, hi] : inter_pause_intervals(n, sig.t0, sig.sample_rate, pauses)) {
    if (hi - lo + 1 < 3) {
      std::ostringstream os;
      os << "interval with " << hi - lo + 1 << " samples skipped";
      out.notices.push_back({sig.t0 + static_cast<double>(lo) / sig.sample_rate,
                             sig.t0 + static_cast<double>(hi) / sig.sample_rate, os.str()});
      continue;
    }

    // Boundary samples in ascending order, with a flag for genuine crossings.
    std::vector<Eigen::Index> bounds{lo};
    std::vector<bool> crossing{is_zero(v(lo)) || (lo > 0 && sign_change(v(lo - 1), v(lo)))};
    auto add = [&](Eigen::Index i, bool is_crossing) {
      if (i == bounds.back()) {
        crossing.back() = crossing.back() || is_crossing;
      } else if (i > bounds.back()) {
        bounds.push_back(i);
        crossing.push_back(is_crossing);
      }
    };
    for (Eigen::Index i = lo + 1; i <= hi; ++i) {
      if (is_zero(v(i))) {
        add(i, true);
      } else if (sign_change(v(i - 1), v(i))) {
        const double frac = v(i - 1) / (v(i - 1) - v(i));
        add(frac <= 0.5 ? i - 1 : i, true);
      }
    }
    const bool end_crossing = is_zero(v(hi)) || (hi + 1 < n && sign_change(v(hi), v(hi + 1)));
    add(hi, end_crossing);

    for (std::size_t j = 0; j + 1 < bounds.size(); ++j) {
      const Eigen::Index a = bounds[j];
      const Eigen::Index b = bounds[j + 1];
      if (b - a < 2) continue;  // no interior samples
      GestureToken tok = slice_token(sig, a, b);
      tok.id = next_id++;
      tok.starts_at_crossing = crossing[j];
      tok.ends_at_crossing = crossing[j + 1];
      tok.status = (tok.starts_at_crossing && tok.ends_at_crossing) ? TokenStatus::Kept
                                                                     : TokenStatus::ExcludedEdge;
      out.tokens.push_back(std::move(tok));
    }
  }
  return out;
}

int count_velocity_peaks(const Eigen::Ref<const Eigen::VectorXd>& velocity, double prominence_fraction) {
  const Eigen::Index n = velocity.size();
  if (n < 3) return 0;
  const Eigen::VectorXd s = velocity.cwiseAbs();
  const double vmax = s.maxCoeff();
  if (!(vmax > 0)) return 0;
  const double floor = prominence_fraction * vmax;

  int peaks = 0;
  Eigen::Index i = 1;
  while (i < n - 1) {
    if (s(i - 1) < s(i)) {
      // Walk across a plateau.
      Eigen::Index ahead = i + 1;
      while (ahead < n - 1 && s(ahead) == s(i)) ++ahead;
      if (s(ahead) < s(i)) {
        const Eigen::Index left_edge = i;
        const Eigen::Index right_edge = ahead - 1;
        const double height = s(i);
        double left_min = height;
        for (Eigen::Index j = left_edge; j >= 0; --j) {
          if (s(j) > height) break;
          left_min = std::min(left_min, s(j));
        }
        double right_min = height;
        for (Eigen::Index j = right_edge; j < n; ++j) {
          if (s(j) > height) break;
          right_min = std::min(right_min, s(j));
        }
        if (height - std::max(left_min, right_min) >= floor) ++peaks;
        i = ahead;
        continue;
      }
      i = ahead;
      continue;
    }
    ++i;
  }
  return peaks;
}

void filter_tokens(std::span<GestureToken> tokens, const FilterConfig& cfg) {
  for (auto& tok : tokens) {
    if (tok.status == TokenStatus::ExcludedEdge) continue;
    if (tok.duration() > cfg.max_duration + 1e-12)
      tok.status = TokenStatus::ExcludedDuration;
    else if (count_velocity_peaks(tok.velocity, cfg.prominence_fraction) >= 2)
      tok.status = TokenStatus::ExcludedMultipeak;
    else
      tok.status = TokenStatus::Kept;
  }
}

}  // namespace gsindy
