#pragma once

// Pellet recordings -> one-dimensional articulatory channels -> gesture
// tokens bounded by velocity zero-crossings.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gsindy/error.hpp"

namespace gsindy {

enum class Channel { LA, TT, TD, TR };

inline constexpr Channel kAllChannels[] = {Channel::LA, Channel::TT, Channel::TD, Channel::TR};

std::string_view to_string(Channel c) noexcept;
Channel parse_channel(std::string_view name);

/// |v| below this is treated as zero velocity (mm/s).
inline constexpr double kZeroVelocityTolerance = 1e-9;
inline constexpr double kMaxGestureDuration = 0.200;
inline constexpr double kDefaultProminence = 0.05;
inline constexpr double kDefaultSampleRate = 160.0;

struct PauseInterval {
  double start = 0;
  double end = 0;
};

/// Multi-pellet recording. Tracks are keyed by pellet name (UL, LL, T1, T3,
/// T4) and hold one (x, y) row per sample.
struct Recording {
  std::string speaker;
  double sample_rate = kDefaultSampleRate;
  double t0 = 0;
  std::map<std::string, Eigen::MatrixX2d> tracks;
  std::vector<PauseInterval> pauses;

  Eigen::Index samples() const;
  void validate() const;
};

/// Loads `t,UL_x,UL_y,...` plus an optional `start,end` pause sidecar. Extra
/// columns (e.g. T2) are accepted and ignored.
Recording read_recording(const std::filesystem::path& csv,
                         const std::optional<std::filesystem::path>& pauses_csv,
                         double sample_rate = kDefaultSampleRate);
std::vector<PauseInterval> read_pauses(const std::filesystem::path& csv);

enum class TokenStatus { Kept, ExcludedMultipeak, ExcludedDuration, ExcludedEdge };

std::string_view to_string(TokenStatus s) noexcept;
TokenStatus parse_token_status(std::string_view name);

/// One segmented gesture. `first_sample` indexes the source channel signal.
struct GestureToken {
  std::uint64_t id = 0;
  Channel channel = Channel::LA;
  std::string speaker;
  double sample_rate = kDefaultSampleRate;
  double t0 = 0;
  Eigen::Index first_sample = 0;
  Eigen::VectorXd position;
  Eigen::VectorXd velocity;
  Eigen::VectorXd acceleration;
  /// Whether each end sits on a velocity zero-crossing rather than on an
  /// interval edge.
  bool starts_at_crossing = true;
  bool ends_at_crossing = true;
  TokenStatus status = TokenStatus::Kept;

  Eigen::Index size() const noexcept { return position.size(); }
  double duration() const noexcept {
    return size() > 1 ? static_cast<double>(size() - 1) / sample_rate : 0.0;
  }
  Eigen::VectorXd timestamps() const;
};

/// Vertical distance between upper and lower lip.
Eigen::VectorXd lip_aperture(const Eigen::Ref<const Eigen::VectorXd>& upper_y,
                             const Eigen::Ref<const Eigen::VectorXd>& lower_y);

/// Projection of the mean-centred track onto its major principal axis,
/// oriented to correlate positively with y (with x when the axis is
/// horizontal). Throws DegenerateTrack when the track does not move.
Eigen::VectorXd pca_first_component(const Eigen::Ref<const Eigen::MatrixX2d>& track);

/// Second-order central differences, second-order one-sided at the edges.
Eigen::VectorXd differentiate(const Eigen::Ref<const Eigen::VectorXd>& signal, double sample_rate);

struct Derivatives {
  Eigen::VectorXd velocity;
  Eigen::VectorXd acceleration;
};

/// Velocity by `differentiate`, acceleration by applying it again to the velocity.
Derivatives estimate_derivatives(const Eigen::Ref<const Eigen::VectorXd>& position, double sample_rate);

/// Channel signal with derivatives, ready for segmentation.
struct ChannelSignal {
  Channel channel = Channel::LA;
  std::string speaker;
  double sample_rate = kDefaultSampleRate;
  double t0 = 0;
  Eigen::VectorXd position;
  Eigen::VectorXd velocity;
  Eigen::VectorXd acceleration;
};

ChannelSignal extract_channel(const Recording& rec, Channel channel);

struct SegmentNotice {
  double start = 0;
  double end = 0;
  std::string message;
};

struct Segmentation {
  std::vector<GestureToken> tokens;
  std::vector<SegmentNotice> notices;
};

/// Sample-index ranges [first, last] of the inter-pause intervals.
std::vector<std::pair<Eigen::Index, Eigen::Index>> inter_pause_intervals(
    Eigen::Index n_samples, double t0, double sample_rate, std::span<const PauseInterval> pauses);

/// Splits each inter-pause interval at velocity zero-crossings. Crossings are
/// located by sign change, linearly interpolated and snapped to the nearest
/// sample; adjacent tokens share that boundary sample. Tokens whose end lies
/// on an interval edge rather than a crossing are marked ExcludedEdge.
/// Token ids are assigned consecutively from `first_id`.
Segmentation segment(const ChannelSignal& signal, std::span<const PauseInterval> pauses,
                     std::uint64_t first_id = 0);

/// Number of local maxima of |v| whose topographic prominence is at least
/// `prominence_fraction` of max |v|.
int count_velocity_peaks(const Eigen::Ref<const Eigen::VectorXd>& velocity,
                         double prominence_fraction = kDefaultProminence);

struct FilterConfig {
  double max_duration = kMaxGestureDuration;
  double prominence_fraction = kDefaultProminence;
};

/// Duration rule first, then the multi-peak rule. Edge tokens keep their
/// status.
void filter_tokens(std::span<GestureToken> tokens, const FilterConfig& cfg = {});

}  // namespace gsindy
