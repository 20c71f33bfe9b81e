#pragma once

// Task-dynamic oscillator family: unit-mass damped springs with a target,
// an optional cubic restoring term and gestural activation.

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gsindy/error.hpp"

namespace gsindy {

template <typename Scalar>
struct BasicOscillatorParams {
  Scalar k{1};       // stiffness, 1/s^2
  Scalar b{0};       // damping, 1/s
  Scalar d{0};       // cubic stiffness, 1/(s^2 mm^2)
  Scalar target{0};  // T, mm
  Scalar x0{0};      // initial position, mm
  Scalar v0{0};      // initial velocity, mm/s

  void validate() const {
    using std::isfinite;
    if (!(isfinite(k) && isfinite(b) && isfinite(d) && isfinite(target) && isfinite(x0) &&
          isfinite(v0)))
      throw Error(ErrorKind::InvalidArgument, "oscillator parameters must be finite");
    if (!(k > Scalar(0))) throw Error(ErrorKind::InvalidArgument, "stiffness k must be positive");
    if (d < Scalar(0)) throw Error(ErrorKind::InvalidArgument, "cubic coefficient d must be >= 0");
  }
};

using OscillatorParams = BasicOscillatorParams<double>;

template <typename Scalar>
using PhaseState = Eigen::Matrix<Scalar, 2, 1>;

enum class ModelForm {
  Linear,              // -b v - k (x - T)
  Cubic,               // -b v - k (x - T) + d (x - T)^3
  CubicVelocity,       // -b v^3 - k (x - T) + d (x - T)^3
  LinearReformulated,  // -b v - k x + (k/2)(T + x0)
};

std::string_view to_string(ModelForm form) noexcept;
ModelForm parse_model_form(std::string_view name);

namespace detail {

template <typename Scalar>
void require_finite(const PhaseState<Scalar>& state) {
  if (!state.allFinite()) throw Error(ErrorKind::InvalidState, "non-finite oscillator state");
}

}  // namespace detail

/// Force bracket of the given model form (everything on the right-hand side
/// of x'' = ...). Activation, when present, scales this bracket only.
template <typename Scalar>
Scalar force(ModelForm form, const PhaseState<Scalar>& s, const BasicOscillatorParams<Scalar>& p) {
  const Scalar x = s(0);
  const Scalar v = s(1);
  const Scalar u = x - p.target;
  switch (form) {
    case ModelForm::Linear:
      return -p.b * v - p.k * u;
    case ModelForm::Cubic:
      return -p.b * v - p.k * u + p.d * u * u * u;
    case ModelForm::CubicVelocity:
      return -p.b * v * v * v - p.k * u + p.d * u * u * u;
    case ModelForm::LinearReformulated:
      return -p.b * v - p.k * x + p.k / Scalar(2) * (p.target + p.x0);
  }
  return Scalar(0);
}

template <typename Scalar>
PhaseState<Scalar> eval_model(ModelForm form, const PhaseState<Scalar>& s,
                              const BasicOscillatorParams<Scalar>& p) {
  detail::require_finite(s);
  return PhaseState<Scalar>(s(1), force(form, s, p));
}

template <typename Scalar>
PhaseState<Scalar> eval_linear(const PhaseState<Scalar>& s, const BasicOscillatorParams<Scalar>& p) {
  return eval_model(ModelForm::Linear, s, p);
}

template <typename Scalar>
PhaseState<Scalar> eval_cubic(const PhaseState<Scalar>& s, const BasicOscillatorParams<Scalar>& p) {
  return eval_model(ModelForm::Cubic, s, p);
}

template <typename Scalar>
PhaseState<Scalar> eval_cubic_velocity(const PhaseState<Scalar>& s,
                                       const BasicOscillatorParams<Scalar>& p) {
  return eval_model(ModelForm::CubicVelocity, s, p);
}

template <typename Scalar>
PhaseState<Scalar> eval_linear_reformulated(const PhaseState<Scalar>& s,
                                            const BasicOscillatorParams<Scalar>& p) {
  return eval_model(ModelForm::LinearReformulated, s, p);
}

/// Gestural activation a(t) in [0, 1].
class ActivationSchedule {
 public:
  enum class Kind { Always, Step, Ramped };

  /// a(t) = 1 everywhere.
  ActivationSchedule() = default;

  /// Rectangular pulse: 1 on [ta, tb], 0 elsewhere.
  static ActivationSchedule step(double ta, double tb);

  /// Quarter-sine rise over [ta, tb), plateau over [tb, tc), quarter-sine fall
  /// over [tc, td), 0 outside.
  static ActivationSchedule ramped(double ta, double tb, double tc, double td);

  Kind kind() const noexcept { return kind_; }
  double ta() const noexcept { return ta_; }
  double tb() const noexcept { return tb_; }
  double tc() const noexcept { return tc_; }
  double td() const noexcept { return td_; }

  double operator()(double t) const noexcept;

  /// Times at which a(t) or its derivative is discontinuous.
  std::vector<double> breakpoints() const;

 private:
  Kind kind_ = Kind::Always;
  double ta_ = 0, tb_ = 0, tc_ = 0, td_ = 0;
};

inline double activation(double t, const ActivationSchedule& s) noexcept { return s(t); }

/// Damping giving critical damping at unit mass: b = 2 sqrt(k).
template <typename Scalar>
Scalar critical_damping(Scalar k) {
  using std::sqrt;
  if (!(k > Scalar(0)) || !std::isfinite(static_cast<double>(k)))
    throw Error(ErrorKind::InvalidArgument, "critical damping requires finite k > 0");
  return Scalar(2) * sqrt(k);
}

/// Midpoint between the initial position and the empirical target.
template <typename Scalar>
constexpr Scalar virtual_target(Scalar x0, Scalar target) noexcept {
  return x0 + (target - x0) / Scalar(2);
}

/// Inverse of virtual_target: T = 2 Tv - x0.
template <typename Scalar>
constexpr Scalar actual_target(Scalar virtual_tgt, Scalar x0) noexcept {
  return Scalar(2) * virtual_tgt - x0;
}

}  // namespace gsindy
