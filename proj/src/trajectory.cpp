#include "gsindy/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gsindy/csv.hpp"

namespace gsindy {

std::vector<double> uniform_grid(double t0, double t1, double dt) {
  if (!(std::isfinite(t0) && std::isfinite(t1) && t1 >= t0))
    throw Error(ErrorKind::InvalidArgument, "time span must be finite with t1 >= t0");
  if (!(dt > 0) || !std::isfinite(dt))
    throw Error(ErrorKind::InvalidArgument, "sample step dt must be finite and positive");
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = t0 + static_cast<double>(i) * dt;
  return grid;
}

double Trajectory::dt() const noexcept { return t.size() < 2 ? 0.0 : t(1) - t(0); }

void Trajectory::validate() const {
  const auto n = t.size();
  if (x.size() != n || v.size() != n || (a.size() != 0 && a.size() != n))
    throw Error(ErrorKind::InvalidArgument, "trajectory columns differ in length");
  if (!t.allFinite() || !x.allFinite() || !v.allFinite() || !a.allFinite())
    throw Error(ErrorKind::NonFiniteInput, "trajectory contains non-finite samples");
  if (n < 2) return;
  const double step = dt();
  if (!(step > 0)) throw Error(ErrorKind::InvalidArgument, "trajectory time must increase");
  for (Eigen::Index i = 1; i < n; ++i) {
    const double d = t(i) - t(i - 1);
    if (std::abs(d - step) > 1e-9 * std::max(step, std::abs(t(i))))
      throw Error(ErrorKind::InvalidArgument, "trajectory time step is not uniform");
  }
}

Trajectory integrate(const GestureModel& model, const OscillatorParams& p, double t0, double t1,
                     double dt, const IntegratorOptions& opts) {
  p.validate();
  const std::vector<double> grid = uniform_grid(t0, t1, dt);
  const auto& act = model.activation;
  const ModelForm form = model.form;

  auto rhs = [&](double t, const PhaseState<double>& s) -> PhaseState<double> {
    if (!s.allFinite()) return PhaseState<double>::Constant(std::nan(""));
    return PhaseState<double>(s(1), act(t) * force(form, s, p));
  };

  const std::vector<double> breaks = act.breakpoints();
  const auto states =
      integrate_dense<double, 2>(rhs, t0, PhaseState<double>(p.x0, p.v0), grid, opts, breaks);

  Trajectory out;
  const auto n = static_cast<Eigen::Index>(grid.size());
  out.t = Eigen::Map<const Eigen::VectorXd>(grid.data(), n);
  out.x = states.row(0).transpose();
  out.v = states.row(1).transpose();
  out.a.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.a(i) = act(grid[static_cast<std::size_t>(i)]) * force(form, PhaseState<double>(states.col(i)), p);
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const bool with_a = traj.has_acceleration();
  csv::write_row(os, with_a ? std::vector<std::string>{"t", "x", "v", "a"}
                            : std::vector<std::string>{"t", "x", "v"});
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    if (with_a)
      csv::write_row(os, std::vector<double>{traj.t(i), traj.x(i), traj.v(i), traj.a(i)});
    else
      csv::write_row(os, std::vector<double>{traj.t(i), traj.x(i), traj.v(i)});
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_trajectory_csv(out, traj);
}

namespace {

Trajectory from_table(const csv::Table& table) {
  const auto ct = table.require_column("t");
  const auto cx = table.require_column("x");
  const auto cv = table.require_column("v");
  const auto ca = table.column("a");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Trajectory out;
  out.t.resize(n);
  out.x.resize(n);
  out.v.resize(n);
  if (ca) out.a.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    out.t(i) = row[ct];
    out.x(i) = row[cx];
    out.v(i) = row[cv];
    if (ca) out.a(i) = row[*ca];
  }
  return out;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& is) { return from_table(csv::read(is)); }

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  return from_table(csv::read(path));
}

}  // namespace gsindy
