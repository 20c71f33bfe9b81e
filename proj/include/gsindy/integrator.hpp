#pragma once

// Dormand-Prince 5(4) with the standard fourth-order continuous extension.
// Accepted steps are interpolated onto caller-supplied sample times, so the
// output grid is independent of the adaptive step sequence.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "gsindy/error.hpp"

namespace gsindy {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  /// When set, take steps of exactly this size with no error control.
  std::optional<double> fixed_step;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 200000;
};

namespace dopri5 {

inline constexpr std::array<double, 6> c{1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};

inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;

// Fifth-order weights (also row 7 of the tableau, FSAL).
inline constexpr std::array<double, 7> b{35.0 / 384.0,     0.0,           500.0 / 1113.0,
                                         125.0 / 192.0,    -2187.0 / 6784.0, 11.0 / 84.0,
                                         0.0};
// Difference between fifth- and fourth-order weights.
inline constexpr std::array<double, 7> e{
    35.0 / 384.0 - 5179.0 / 57600.0,      0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0, 11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0};

// Dense output: y(t + theta h) = y + h * sum_i k_i * sum_j P[i][j] theta^(j+1).
inline constexpr std::array<std::array<double, 4>, 7> P{{
    {1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0},
    {0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0},
    {0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0},
    {0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0},
    {0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0},
}};

}  // namespace dopri5

/// Integrates y' = f(t, y) from t0 and returns the state at each of
/// `sample_times` (non-decreasing, all >= t0). Integration restarts at every
/// entry of `breakpoints` that falls inside the span so discontinuities in f
/// do not pollute the error estimate.
///
/// Throws IntegrationError on step-size underflow, non-finite state or when
/// the step budget is exhausted.
template <typename Scalar, int Dim, typename Rhs>
Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> integrate_dense(Rhs&& f, double t0,
                                                           const Eigen::Matrix<Scalar, Dim, 1>& y0,
                                                           std::span<const double> sample_times,
                                                           const IntegratorOptions& opts = {},
                                                           std::span<const double> breakpoints = {}) {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  using std::abs;
  using std::max;
  using std::min;
  using std::pow;
  using std::sqrt;

  const Eigen::Index dim = y0.size();
  Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> out(dim, static_cast<Eigen::Index>(sample_times.size()));
  if (sample_times.empty()) return out;

  if (!y0.allFinite()) throw IntegrationError("non-finite initial state", t0);
  if (!(opts.rtol > 0) || !(opts.atol > 0))
    throw Error(ErrorKind::InvalidArgument, "integrator tolerances must be positive");
  if (opts.fixed_step && !(*opts.fixed_step > 0))
    throw Error(ErrorKind::InvalidArgument, "fixed step must be positive");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (!std::isfinite(sample_times[i]) || sample_times[i] < t0 ||
        (i > 0 && sample_times[i] < sample_times[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "sample times must be finite, sorted and >= t0");
  }

  const double t_end = sample_times.back();

  // Segment boundaries: t0, interior breakpoints, t_end.
  std::vector<double> bounds{t0};
  for (double bp : breakpoints)
    if (bp > t0 && bp < t_end) bounds.push_back(bp);
  std::sort(bounds.begin() + 1, bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  bounds.push_back(t_end);

  auto rms_norm = [&](const State& err, const State& ya, const State& yb) {
    Scalar acc(0);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const Scalar sc = Scalar(opts.atol) + Scalar(opts.rtol) * max(abs(ya(i)), abs(yb(i)));
      const Scalar r = err(i) / sc;
      acc += r * r;
    }
    return sqrt(acc / Scalar(dim));
  };

  auto eval = [&](double t, const State& y) -> State {
    State r = f(t, y);
    return r;
  };

  std::size_t next_sample = 0;
  // Samples exactly at t0.
  while (next_sample < sample_times.size() && sample_times[next_sample] == t0) {
    out.col(static_cast<Eigen::Index>(next_sample)) = y0;
    ++next_sample;
  }

  State y = y0;
  std::size_t steps = 0;
  std::array<State, 7> k;
  for (auto& ki : k) ki.resize(dim);

  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    double t = bounds[seg];
    const double t_stop = bounds[seg + 1];
    if (!(t_stop > t)) continue;

    k[0] = eval(t, y);
    if (!k[0].allFinite()) throw IntegrationError("non-finite derivative", t);

    double h;
    if (opts.fixed_step) {
      h = *opts.fixed_step;
    } else {
      // Initial step selection (Hairer, Norsett & Wanner, II.4).
      State scale(dim);
      for (Eigen::Index i = 0; i < dim; ++i)
        scale(i) = Scalar(opts.atol) + abs(y(i)) * Scalar(opts.rtol);
      const double d0 = static_cast<double>(sqrt((y.array() / scale.array()).square().mean()));
      const double d1 = static_cast<double>(sqrt((k[0].array() / scale.array()).square().mean()));
      double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
      h0 = std::min(h0, t_stop - t);
      const State y1 = y + Scalar(h0) * k[0];
      const State f1 = eval(t + h0, y1);
      const double d2 =
          f1.allFinite()
              ? static_cast<double>(sqrt(((f1 - k[0]).array() / scale.array()).square().mean())) / h0
              : std::numeric_limits<double>::infinity();
      double h1;
      if (d1 <= 1e-15 && d2 <= 1e-15)
        h1 = std::max(1e-6, h0 * 1e-3);
      else
        h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
      h = std::min({100 * h0, h1, opts.max_step});
    }

    bool last_rejected = false;
    while (t < t_stop) {
      if (++steps > opts.max_steps) {
        std::ostringstream os;
        os << "integration step budget exhausted at t=" << t;
        throw IntegrationError(os.str(), t);
      }
      const double min_step = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
      if (h < min_step) {
        std::ostringstream os;
        os << "step size underflow at t=" << t;
        throw IntegrationError(os.str(), t);
      }
      bool final_step = false;
      if (t + h >= t_stop || t_stop - (t + h) < min_step) {
        h = t_stop - t;
        final_step = true;
      }

      using namespace dopri5;
      const Scalar hs(h);
      k[1] = eval(t + c[0] * h, y + hs * (a21 * k[0]));
      k[2] = eval(t + c[1] * h, y + hs * (a31 * k[0] + a32 * k[1]));
      k[3] = eval(t + c[2] * h, y + hs * (a41 * k[0] + a42 * k[1] + a43 * k[2]));
      k[4] = eval(t + c[3] * h, y + hs * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]));
      k[5] = eval(t + c[4] * h,
                  y + hs * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]));
      const State y_new =
          y + hs * (b[0] * k[0] + b[2] * k[2] + b[3] * k[3] + b[4] * k[4] + b[5] * k[5]);
      k[6] = eval(t + h, y_new);

      const bool finite = y_new.allFinite() && k[6].allFinite();
      double err_norm = std::numeric_limits<double>::infinity();
      if (finite && !opts.fixed_step) {
        State err = hs * (e[0] * k[0] + e[2] * k[2] + e[3] * k[3] + e[4] * k[4] + e[5] * k[5] +
                          e[6] * k[6]);
        err_norm = static_cast<double>(rms_norm(err, y, y_new));
      }

      if (opts.fixed_step) {
        if (!finite) throw IntegrationError("non-finite state", t);
      } else if (!finite || !(err_norm <= 1.0)) {
        const double factor =
            finite ? std::max(0.2, 0.9 * std::pow(err_norm, -1.0 / 5.0)) : 0.2;
        h *= last_rejected ? std::min(factor, 0.5) : factor;
        last_rejected = true;
        continue;
      }

      // Accepted: interpolate pending samples in (t, t + h].
      const double t_new = final_step ? t_stop : t + h;
      while (next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
        const double ts = sample_times[next_sample];
        if (ts == t_new) {
          out.col(static_cast<Eigen::Index>(next_sample)) = y_new;
        } else {
          const double theta = (ts - t) / h;
          std::array<double, 4> pw{theta, theta * theta, theta * theta * theta,
                                   theta * theta * theta * theta};
          State acc = State::Zero(dim);
          for (std::size_t i = 0; i < 7; ++i) {
            const double w = P[i][0] * pw[0] + P[i][1] * pw[1] + P[i][2] * pw[2] + P[i][3] * pw[3];
            if (w != 0.0) acc += Scalar(w) * k[i];
          }
          out.col(static_cast<Eigen::Index>(next_sample)) = y + hs * acc;
        }
        ++next_sample;
      }

      t = t_new;
      y = y_new;
      k[0] = k[6];

      if (!opts.fixed_step) {
        double factor = err_norm == 0.0 ? 10.0 : 0.9 * std::pow(err_norm, -1.0 / 5.0);
        factor = std::clamp(factor, 0.2, 10.0);
        if (last_rejected) factor = std::min(factor, 1.0);
        h = std::min(h * factor, opts.max_step);
      } else {
        h = *opts.fixed_step;
      }
      last_rejected = false;
    }
  }

  while (next_sample < sample_times.size()) {
    out.col(static_cast<Eigen::Index>(next_sample)) = y;
    ++next_sample;
  }
  return out;
}

/// Uniform grid t0, t0 + dt, ... up to and including t1 (within 1e-9 dt).
std::vector<double> uniform_grid(double t0, double t1, double dt);

}  // namespace gsindy
