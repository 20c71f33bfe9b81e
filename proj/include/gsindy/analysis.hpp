#pragma once

// Qualitative diagnostics of tokens and fits: Hooke linearity, portrait
// tables, virtual-target correlations and percentile exemplars.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gsindy/kinematics.hpp"
#include "gsindy/pipeline.hpp"
#include "gsindy/trajectory.hpp"

namespace gsindy {

struct HookeScore {
  std::uint64_t token_id = 0;
  Channel channel = Channel::LA;
  double r2h = std::numeric_limits<double>::quiet_NaN();
  double intercept = 0;
  double slope = 0;
  /// Acceleration has no variance; r2h is undefined (NaN).
  bool degenerate = false;
};

/// OLS fit a = b0 + b1 x over the token and its coefficient of determination.
HookeScore hooke_linearity(const GestureToken& token);

struct PortraitTable {
  std::vector<std::string> header;
  Eigen::MatrixXd columns;  // samples x header.size()
};

/// Columns x, v, a of the token, followed by x_pred, v_pred, a_pred when a
/// prediction is given. A prediction without acceleration gets one by
/// differentiating its velocity.
PortraitTable portrait_data(const GestureToken& token, const Trajectory* prediction = nullptr);

void write_portrait_csv(std::ostream& os, const PortraitTable& table);
void write_portrait_csv(const std::filesystem::path& path, const PortraitTable& table);
PortraitTable read_portrait_csv(std::istream& is);

struct CensusFraction {
  double cutoff = 0;
  double above = 0;  // fraction with r2h > cutoff
  double below = 0;  // fraction with r2h < cutoff
};

struct CensusRow {
  Channel channel = Channel::LA;
  std::size_t n = 0;
  std::size_t n_degenerate = 0;  // not counted in n
  std::vector<CensusFraction> fractions;
};

inline constexpr double kCensusCutoffs[] = {0.95, 0.90};

/// Per-channel fractions of Hooke scores above and below each cutoff.
std::vector<CensusRow> nonlinearity_census(std::span<const HookeScore> scores,
                                           std::span<const double> cutoffs = kCensusCutoffs);

/// Pearson correlation; throws InvalidArgument for fewer than two pairs or
/// a constant series.
double pearson(std::span<const double> a, std::span<const double> b);

struct TargetPair {
  std::uint64_t token_id = 0;
  Channel channel = Channel::LA;
  double virtual_target = 0;
  double target = 0;     // 2 Tv - x0
  double empirical = 0;  // position at the token's final sample
};

/// Tv = constant / k from the acceleration equation of a second-order fit.
/// A dropped constant gives Tv = 0; nullopt when the library has no constant
/// or x term, or k = 0.
std::optional<TargetPair> target_pair(const TokenFit& fit, const GestureToken& token);

struct CorrelationRow {
  Channel channel = Channel::LA;
  std::size_t n = 0;
  std::size_t skipped = 0;
  double r = std::numeric_limits<double>::quiet_NaN();
};

/// Per-channel Pearson r between |T| and |x_end|. Fits are matched to
/// tokens by id.
std::vector<CorrelationRow> target_correlation(std::span<const TokenFit> fits,
                                               std::span<const GestureToken> tokens);

/// Nearest-rank percentile over r2 (p = 100 is the best fit). Among fits
/// with the selected score the lowest token id wins. NaN scores are ignored.
const TokenFit& percentile_fit(std::span<const TokenFit> fits, double p);

}  // namespace gsindy
