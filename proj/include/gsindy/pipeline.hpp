#pragma once

// Per-token model discovery: train/test split, threshold-swept fits scored
// by forward prediction, majority-structure ensembles and summary tables.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gsindy/dynamics.hpp"
#include "gsindy/features.hpp"
#include "gsindy/integrator.hpp"
#include "gsindy/kinematics.hpp"
#include "gsindy/regression.hpp"
#include "gsindy/trajectory.hpp"

namespace gsindy {

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TokenSplit {
  std::vector<GestureToken> train;
  std::vector<GestureToken> test;
};

/// Stratified by channel; each channel contributes round(fraction * n) of its
/// kept tokens to the training set. Both halves are ordered by token id.
TokenSplit split(std::span<const GestureToken> tokens, const SplitConfig& cfg);

struct FitConfig {
  /// 1: x' = f(x) from position. 2: x'' = f(x, x') with the first equation
  /// pinned to x' = 1.00 x'.
  int order = 2;
  FeatureLibrary library = polynomial_library(1, 2);
  std::vector<double> thresholds{std::begin(kDefaultThresholds), std::end(kDefaultThresholds)};
  OptimizerConfig stlsq = OptimizerConfig::stlsq_defaults();
  OptimizerConfig sr3 = OptimizerConfig::sr3_defaults();
  IntegratorOptions integrator{};

  void validate() const;
};

struct TokenFit {
  std::uint64_t token_id = 0;
  Channel channel = Channel::LA;
  std::string speaker;
  int order = 2;
  FeatureLibrary library;
  Eigen::MatrixXd coefficients;  // terms x equations
  SupportMask support;
  double r2 = -std::numeric_limits<double>::infinity();
  double threshold = 0;
  bool converged = false;
  int iterations = 0;
  /// Forward prediction failed; r2 is -inf.
  bool integration_failed = false;
  std::string optimizer;  // "stlsq", "sr3" or "lstsq"
  /// Score at each swept threshold (NaN where the fit came out empty).
  std::vector<double> sweep_scores;

  /// Retained term names of each equation.
  std::vector<std::vector<std::string>> structure() const;
};

/// Design matrix and derivative targets of a token for the given order.
struct DesignData {
  Eigen::MatrixXd states;
  Eigen::MatrixXd theta;
  Eigen::MatrixXd targets;
};
DesignData design_data(const GestureToken& token, const FeatureLibrary& library, int order);

/// Sweeps the thresholds, keeping the fit whose forward prediction scores
/// best. Coefficients are refit without regularization on the chosen
/// support. Throws EmptyModel when every threshold empties the model.
TokenFit fit_token(const GestureToken& token, const FitConfig& cfg);

/// Integrates the model from (x0, v0) and samples it at `timestamps`. For
/// first-order models v is the model's right-hand side along the solution
/// and a is left empty.
Trajectory predict(const FeatureLibrary& library, const Eigen::MatrixXd& coefficients, int order,
                   double x0, double v0, std::span<const double> timestamps,
                   const IntegratorOptions& opts = {});
Trajectory predict(const TokenFit& fit, const GestureToken& token, const IntegratorOptions& opts = {});

/// Position and velocity R^2 combined with weights proportional to each
/// signal's variance. Throws DegenerateTrack when both signals are constant.
double variance_weighted_r2(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& v,
                            const Eigen::Ref<const Eigen::VectorXd>& x_pred,
                            const Eigen::Ref<const Eigen::VectorXd>& v_pred);

/// Scores a prediction against a token; -inf when the prediction fails.
double score_prediction(const GestureToken& token, const FeatureLibrary& library,
                        const Eigen::MatrixXd& coefficients, int order,
                        const IntegratorOptions& opts, bool* failed = nullptr);

struct CoefficientStats {
  Eigen::Index equation = 0;
  Eigen::Index term = 0;
  std::size_t count = 0;
  double mean = 0;
  double sd = 0;
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
};

struct StructureCount {
  SupportMask support;
  std::size_t count = 0;
};

struct EnsembleModel {
  int order = 2;
  FeatureLibrary library;
  SupportMask structure;
  /// Distinct structures, most frequent first (same order as the tie rule).
  std::vector<StructureCount> histogram;
  /// Over the fits whose support equals `structure`.
  std::vector<CoefficientStats> coefficients;
  Eigen::MatrixXd mean_coefficients;
  std::size_t n_fits = 0;

  std::size_t majority_count() const { return histogram.empty() ? 0 : histogram.front().count; }
};

/// Majority structure; ties go to fewer terms, then to the lexicographically
/// smaller list of term indices.
EnsembleModel ensemble(std::span<const TokenFit> fits);

/// Threshold-free least squares on a fixed support, scored like fit_token.
TokenFit refit_on_support(const GestureToken& token, const SupportMask& support, const FitConfig& cfg);
std::vector<TokenFit> refit_test(std::span<const GestureToken> tokens, const SupportMask& structure,
                                 const FitConfig& cfg, std::size_t jobs = 1);

struct NamedLibrary {
  std::string name;
  FeatureLibrary library;
};

/// Polynomial degrees 1..4 over the order's state variables, without mixed
/// products.
std::vector<NamedLibrary> default_comparison_libraries(int order);

struct R2Summary {
  std::size_t n = 0;         // finite scores
  std::size_t n_failed = 0;  // empty models and failed predictions
  double mean = -std::numeric_limits<double>::infinity();
  double sd = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  /// No finite score at all.
  bool flagged() const noexcept { return n == 0; }
};

R2Summary summarize_r2(std::span<const double> scores);

struct ComparisonRow {
  std::string library;
  Channel channel = Channel::LA;
  double threshold = 0;
  R2Summary summary;
};

/// Fits every token with every library. For each (library, channel) the
/// threshold with the highest mean R^2 is selected and its statistics
/// reported.
std::vector<ComparisonRow> library_comparison(std::span<const GestureToken> tokens,
                                              std::span<const NamedLibrary> libraries,
                                              const FitConfig& base, std::size_t jobs = 1);

struct FitSummaryRow {
  Channel channel = Channel::LA;
  R2Summary summary;
  double mean_terms = 0;
};

/// Per-channel R^2 statistics of a set of fits.
std::vector<FitSummaryRow> summarize_fits(std::span<const TokenFit> fits);

// ---------------------------------------------------------------------------
// Synthetic corpora

struct Range {
  double lo = 0;
  double hi = 0;
};

struct SyntheticGroup {
  std::string name;
  ModelForm form = ModelForm::Linear;
  std::size_t count = 0;
  Range k{1000, 3000};
  /// b = ratio * 2 sqrt(k).
  Range damping_ratio{1, 1};
  /// d = ratio * k.
  Range cubic_ratio{0, 0};
  Range target{-1, 1};
  /// x0 = target + amplitude.
  Range amplitude{1, 1};
  /// Fixed token length in seconds; unset means stop at the first velocity
  /// zero after the start (a half cycle).
  std::optional<double> duration = 0.25;
};

struct SyntheticSpec {
  std::vector<SyntheticGroup> groups;
  double sample_rate = 1000;
  /// Position noise standard deviation as a fraction of the token's
  /// movement amplitude.
  double noise = 0;
  std::uint64_t seed = 0;
  Channel channel = Channel::LA;

  void validate() const;
};

struct GroundTruth {
  std::uint64_t token_id = 0;
  std::string group;
  ModelForm form = ModelForm::Linear;
  OscillatorParams params;
};

struct SyntheticCorpus {
  std::vector<GestureToken> tokens;
  std::vector<GroundTruth> truth;
};

/// Simulates each group's tokens with uniformly drawn parameters. Velocity
/// is the simulated velocity, acceleration its numerical derivative; noise
/// is added to position only.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

/// Builds a token from a trajectory, differentiating v for the acceleration.
GestureToken token_from_trajectory(const Trajectory& traj, std::uint64_t id = 0,
                                   Channel channel = Channel::LA);

}  // namespace gsindy
