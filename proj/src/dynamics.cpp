#include "gsindy/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gsindy {

std::string_view to_string(ModelForm form) noexcept {
  switch (form) {
    case ModelForm::Linear:
      return "linear";
    case ModelForm::Cubic:
      return "cubic";
    case ModelForm::CubicVelocity:
      return "cubic_velocity";
    case ModelForm::LinearReformulated:
      return "linear_reformulated";
  }
  return "linear";
}

ModelForm parse_model_form(std::string_view name) {
  for (ModelForm f : {ModelForm::Linear, ModelForm::Cubic, ModelForm::CubicVelocity,
                      ModelForm::LinearReformulated})
    if (to_string(f) == name) return f;
  throw Error(ErrorKind::InvalidArgument, "unknown model '" + std::string(name) +
                                              "' (expected linear, cubic, cubic_velocity or "
                                              "linear_reformulated)");
}

ActivationSchedule ActivationSchedule::step(double ta, double tb) {
  if (!(std::isfinite(ta) && std::isfinite(tb) && ta < tb))
    throw Error(ErrorKind::InvalidArgument, "step activation requires finite ta < tb");
  ActivationSchedule s;
  s.kind_ = Kind::Step;
  s.ta_ = ta;
  s.tb_ = tb;
  return s;
}

ActivationSchedule ActivationSchedule::ramped(double ta, double tb, double tc, double td) {
  if (!(std::isfinite(ta) && std::isfinite(tb) && std::isfinite(tc) && std::isfinite(td) &&
        ta < tb && tb <= tc && tc < td))
    throw Error(ErrorKind::InvalidArgument, "ramped activation requires ta < tb <= tc < td");
  ActivationSchedule s;
  s.kind_ = Kind::Ramped;
  s.ta_ = ta;
  s.tb_ = tb;
  s.tc_ = tc;
  s.td_ = td;
  return s;
}

double ActivationSchedule::operator()(double t) const noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  switch (kind_) {
    case Kind::Always:
      return 1.0;
    case Kind::Step:
      return (t >= ta_ && t <= tb_) ? 1.0 : 0.0;
    case Kind::Ramped:
      if (t < ta_) return 0.0;
      if (t < tb_) return std::clamp(std::sin(two_pi * (t - ta_) / (4.0 * (tb_ - ta_))), 0.0, 1.0);
      if (t < tc_) return 1.0;
      if (t < td_) return std::clamp(std::sin(two_pi * (t - td_) / (4.0 * (tc_ - td_))), 0.0, 1.0);
      return 0.0;
  }
  return 1.0;
}

std::vector<double> ActivationSchedule::breakpoints() const {
  switch (kind_) {
    case Kind::Always:
      return {};
    case Kind::Step:
      return {ta_, tb_};
    case Kind::Ramped:
      return {ta_, tb_, tc_, td_};
  }
  return {};
}

}  // namespace gsindy
