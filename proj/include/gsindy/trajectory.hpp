#pragma once

#include <filesystem>
#include <iosfwd>

#include <Eigen/Core>

#include "gsindy/dynamics.hpp"
#include "gsindy/integrator.hpp"

namespace gsindy {

/// Uniformly sampled kinematic time series. `a` is either empty or the same
/// length as the other columns.
struct Trajectory {
  Eigen::VectorXd t;
  Eigen::VectorXd x;
  Eigen::VectorXd v;
  Eigen::VectorXd a;

  Eigen::Index size() const noexcept { return t.size(); }
  bool has_acceleration() const noexcept { return a.size() > 0; }

  /// Sample spacing; 0 for fewer than two samples.
  double dt() const noexcept;

  /// Checks equal lengths, finiteness and uniform strictly increasing time.
  void validate() const;
};

/// An oscillator form together with its activation schedule.
struct GestureModel {
  ModelForm form = ModelForm::Linear;
  ActivationSchedule activation{};
};

/// Simulates `model` from (p.x0, p.v0) over [t0, t1] and samples the dense
/// solution every `dt`. Acceleration is filled with a(t) times the force.
Trajectory integrate(const GestureModel& model, const OscillatorParams& p, double t0, double t1,
                     double dt, const IntegratorOptions& opts = {});

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace gsindy
