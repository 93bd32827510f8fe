#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pbgfm/atoms.hpp"
#include "pbgfm/control.hpp"
#include "pbgfm/electrostatics.hpp"
#include "pbgfm/gfm.hpp"
#include "pbgfm/grid.hpp"
#include "pbgfm/stepping.hpp"
#include "pbgfm/surface.hpp"

namespace pbgfm {

/// Everything static about one solve: solute, interface, operator, kappa^2 field and Dirichlet data.
class Problem {
 public:
  Problem(AtomSet atoms, const PhysicalParams& params, InterfaceData interface);
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  const AtomSet& atoms() const noexcept { return atoms_; }
  const PhysicalParams& params() const noexcept { return params_; }
  const InterfaceData& interface() const noexcept { return interface_; }
  const Grid& grid() const noexcept { return interface_.grid(); }
  const InterfaceOperator& op() const noexcept { return op_; }
  /// kappa^2 on solvent nodes, 0 on solute nodes.
  const Field& kappa_sq() const noexcept { return kappa_sq_; }
  /// Dirichlet data on boundary nodes, 0 elsewhere.
  const Field& boundary() const noexcept { return boundary_; }

  double energy(const Field& u) const { return solvation_energy(u, atoms_, params_); }

 private:
  AtomSet atoms_;
  PhysicalParams params_;
  InterfaceData interface_;
  InterfaceOperator op_;
  Field kappa_sq_;
  Field boundary_;
};

enum class SurfaceKind { Sphere, Vdw, SesGrid, Import };

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::SesGrid;
  std::string import_path;
  double probe_radius = kDefaultProbeRadius;
  SesOptions ses;
};

/// Parses sphere, vdw, ses-grid or import:PATH.
SurfaceSpec parse_surface(const std::string& text);

/// Grid from build_grid (or the imported file) and the requested surface. The sphere kind needs a single atom.
std::unique_ptr<Problem> make_problem(const AtomSet& atoms, const PhysicalParams& params, double h,
                                      const SurfaceSpec& surface);

/// Unit charge at the origin in a sphere of radius 2 on the box [-half_width, half_width]^3.
std::unique_ptr<Problem> kirkwood_problem(double h, double kappa_sq, double half_width = 8.0);

enum class InitialKind { Zero, Lpb };

/// zero: 0 inside, Dirichlet data on the boundary. lpb: the linearized equation stepped with
/// constant dt = 0.01 until the energy difference drops below 1e-3 or t = 10.
Field initial_condition(InitialKind kind, const Problem& problem, Scheme scheme = Scheme::ADI);

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  double energy = 0.0;
  double delta_e = 0.0;
  double error = 0.0;
  double factor = 1.0;
};

struct EnergyTrace {
  std::vector<StepRecord> records;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double final_time = 0.0;
  std::size_t steps = 0;
  double wall_seconds = 0.0;
};

struct RunConfig {
  Scheme scheme = Scheme::ADI;
  ControllerConfig controller = ControllerConfig::defaults(ControllerKind::NonincreasingPID);
  InitialKind ic = InitialKind::Zero;
  Reaction reaction = Reaction::Sinh;
  /// When set, the controller trace CSV is streamed here.
  std::ostream* trace_csv = nullptr;
};

struct RunResult {
  EnergyTrace trace;
  Field u;
};

/// Pseudo-time loop. Throws DivergenceError on a non-finite field or |E| > 1e8.
RunResult run(const Problem& problem, const RunConfig& config);
/// Same, from a caller-supplied initial field.
RunResult run_from(const Problem& problem, const RunConfig& config, Field u0);

struct ScheduleSwitch {
  double t_switch = 0.0;
  double dt = 0.0;
};

/// Piecewise-constant steps: dt changes at the first step starting at t >= t_switch.
/// Runs until config.controller.t_end; the energy-difference stop is not applied.
RunResult run_schedule(const Problem& problem, const RunConfig& config, const std::vector<ScheduleSwitch>& switches);

struct ConvergenceRow {
  double resolution = 0.0;
  double energy = 0.0;
  double rel_error = 0.0;
  bool diverged = false;
  std::string message;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;  ///< coarse to fine, reference last
  double reference_energy = 0.0;
  double rate = 0.0;  ///< NaN when undefined
  std::string message;
};

/// Energies at each resolution from `solve`; the smallest resolution is the reference and the rate is the
/// least-squares slope of log(relative error) against log(resolution) over the others.
ConvergenceTable convergence_study(const std::function<double(double)>& solve, std::vector<double> resolutions);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class PotentialMode { U, Phi };

/// u itself, or u + G on solute nodes. Solute nodes on a point charge become +-inf.
Field recover_potential(const Field& u, const Problem& problem, PotentialMode mode);

enum class FieldFormat { Binary, Csv };
void export_potential(const std::string& path, const Field& u, const Problem& problem, PotentialMode mode,
                      FieldFormat format = FieldFormat::Binary);

}  // namespace pbgfm
