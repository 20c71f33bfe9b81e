#pragma once

// Sparse solvers for Xdot = Theta(X) Xi.
//
// Coefficient matrices are terms x equations. Where a flat coefficient
// vector is needed (equality constraints), it is equation-major:
// xi[e * n_terms + j] = Xi(j, e).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "gsindy/error.hpp"

namespace gsindy {

using SupportMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct OptimizerConfig {
  double threshold = 0.1;  // lambda (STLSQ) or eta (SR3)
  double alpha = 0.05;     // ridge weight, STLSQ only
  double nu = 1.0;         // SR3 relaxation
  int max_iter = 20;
  /// SR3 stops once successive proxy iterates differ by less than this.
  double tolerance = 1e-10;

  void validate() const;

  static OptimizerConfig stlsq_defaults() { return {0.1, 0.05, 1.0, 20, 1e-10}; }
  static OptimizerConfig sr3_defaults() { return {0.1, 0.0, 1.0, 30, 1e-10}; }
};

struct SparseCoefficients {
  Eigen::MatrixXd coefficients;  // terms x equations; zero wherever !support
  SupportMask support;
  int iterations = 0;
  bool converged = false;
  /// Support after each thresholding pass (STLSQ only).
  std::vector<SupportMask> support_path;
};

/// Linear equality constraints C xi = d over the equation-major flattening.
struct ConstraintSet {
  Eigen::MatrixXd lhs;  // C
  Eigen::VectorXd rhs;  // d

  Eigen::Index size() const noexcept { return lhs.rows(); }
  bool empty() const noexcept { return lhs.rows() == 0; }

  /// Pins every coefficient of equation `equation` to `values`.
  static ConstraintSet fix_equation(Eigen::Index n_terms, Eigen::Index n_equations,
                                    Eigen::Index equation, const Eigen::VectorXd& values);
};

/// argmin ||Y - Theta Xi||^2 + alpha ||Xi||^2 through the normal equations
/// with a Cholesky factorization. Throws IllConditioned when the system is
/// numerically singular.
Eigen::MatrixXd ridge_solve(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                            const Eigen::Ref<const Eigen::MatrixXd>& targets, double alpha);

/// Unregularized least squares restricted to `support`; inactive entries are
/// exactly zero. Falls back to the minimum-norm solution when the restricted
/// normal equations are singular.
Eigen::MatrixXd least_squares_on_support(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                         const Eigen::Ref<const Eigen::MatrixXd>& targets,
                                         const SupportMask& support);

/// Sequentially thresholded ridge regression. The final coefficients are an
/// unregularized refit on the final support.
SparseCoefficients stlsq(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                         const Eigen::Ref<const Eigen::MatrixXd>& targets, const OptimizerConfig& cfg,
                         const std::optional<SupportMask>& initial_support = std::nullopt);

/// Relaxed regression with a hard-threshold (l0) proxy and exact equality
/// constraints enforced through the KKT system of the coupled step.
/// Entries touched by a constraint are never thresholded. `weights`, when
/// non-empty, scales the threshold per entry (terms x equations).
SparseCoefficients sr3_constrained(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                   const Eigen::Ref<const Eigen::MatrixXd>& targets,
                                   const OptimizerConfig& cfg, const ConstraintSet& constraints,
                                   const Eigen::MatrixXd& weights = {});

inline constexpr double kDefaultThresholds[] = {0.001, 0.01, 0.1};

template <typename Result>
struct SweepResult {
  double threshold = 0;
  Result result;
  double score = -std::numeric_limits<double>::infinity();
  std::vector<double> scores;  // aligned with the thresholds as given
};

/// True when `candidate` should replace `incumbent`: finite beats
/// non-finite, larger beats smaller, ties keep the incumbent.
inline bool score_improves(double candidate, double incumbent) noexcept {
  if (!std::isfinite(candidate)) return false;
  if (!std::isfinite(incumbent)) return true;
  return candidate > incumbent;
}

/// Fits at each threshold and keeps the best-scoring result. Thresholds are
/// visited in ascending order so ties resolve to the smallest threshold.
/// Thresholds whose fit raises EmptyModel are skipped; if every fit does,
/// the first such error is rethrown.
template <typename FitFn, typename ScoreFn>
auto threshold_sweep(std::span<const double> thresholds, FitFn&& fit, ScoreFn&& score)
    -> SweepResult<std::invoke_result_t<FitFn&, double>> {
  using Result = std::invoke_result_t<FitFn&, double>;
  if (thresholds.empty()) throw Error(ErrorKind::InvalidArgument, "threshold set is empty");

  std::vector<std::size_t> order(thresholds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return thresholds[a] < thresholds[b]; });

  std::optional<SweepResult<Result>> best;
  std::vector<double> scores(thresholds.size(), std::numeric_limits<double>::quiet_NaN());
  std::optional<Error> first_error;
  for (std::size_t idx : order) {
    const double thr = thresholds[idx];
    std::optional<Result> result;
    try {
      result.emplace(fit(thr));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyModel) throw;
      if (!first_error) first_error.emplace(e);
      continue;
    }
    const double s = score(*result);
    scores[idx] = s;
    if (!best || score_improves(s, best->score))
      best.emplace(SweepResult<Result>{thr, std::move(*result), s, {}});
  }
  if (!best) throw *first_error;
  best->scores = std::move(scores);
  return std::move(*best);
}

}  // namespace gsindy
