#include "pbgfm/driver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "pbgfm/error.hpp"

namespace pbgfm {

namespace {

InterfaceData checked(InterfaceData interface) {
  if (!interface.boundary_is_solvent()) throw ValidationError("solute reaches the outer boundary of the grid");
  return interface;
}

}  // namespace

Problem::Problem(AtomSet atoms, const PhysicalParams& params, InterfaceData interface)
    : atoms_(std::move(atoms)),
      params_(params),
      interface_(checked(std::move(interface))),
      op_(interface_, atoms_, params_),
      kappa_sq_(interface_.grid()),
      boundary_(interface_.grid()) {
  const Grid& g = grid();
  for (const Atom& a : atoms_)
    if (!g.contains(a.center)) throw ValidationError("atom center outside the grid");
  for (std::size_t n = 0; n < g.size(); ++n) {
    kappa_sq_[n] = interface_.inside(n) ? 0.0 : params_.kappa_sq;
    if (g.is_boundary(n)) boundary_[n] = dirichlet_boundary(atoms_, g.node(g.unravel(n)), params_);
  }
}

SurfaceSpec parse_surface(const std::string& text) {
  SurfaceSpec s;
  if (text == "sphere")
    s.kind = SurfaceKind::Sphere;
  else if (text == "vdw")
    s.kind = SurfaceKind::Vdw;
  else if (text == "ses-grid")
    s.kind = SurfaceKind::SesGrid;
  else if (text.rfind("import:", 0) == 0 && text.size() > 7) {
    s.kind = SurfaceKind::Import;
    s.import_path = text.substr(7);
  } else
    throw ValidationError("unknown surface '" + text + "'");
  return s;
}

std::unique_ptr<Problem> make_problem(const AtomSet& atoms, const PhysicalParams& params, double h,
                                      const SurfaceSpec& surface) {
  params.validate();
  if (surface.kind == SurfaceKind::Import) {
    std::ifstream in(surface.import_path);
    if (!in) throw IoError("cannot open interface file " + surface.import_path);
    return std::make_unique<Problem>(atoms, params, import_interface(in));
  }
  const double probe = surface.kind == SurfaceKind::SesGrid ? surface.probe_radius : 0.0;
  const Grid grid = build_grid(atoms, h, probe);
  switch (surface.kind) {
    case SurfaceKind::Sphere:
      if (atoms.size() != 1) throw ValidationError("the sphere surface needs exactly one atom");
      return std::make_unique<Problem>(atoms, params, classify_sphere(grid, atoms[0].center, atoms[0].radius));
    case SurfaceKind::Vdw:
      return std::make_unique<Problem>(atoms, params, classify_union(grid, atoms, 0.0));
    default:
      return std::make_unique<Problem>(atoms, params, classify_ses_grid(grid, atoms, probe, surface.ses));
  }
}

std::unique_ptr<Problem> kirkwood_problem(double h, double kappa_sq, double half_width) {
  const AtomSet atoms({Atom{{0, 0, 0}, 1.0, 2.0}});
  const PhysicalParams params = PhysicalParams::with_kappa_sq(1.0, 80.0, kappa_sq);
  const Grid grid = grid_for_box({-half_width, -half_width, -half_width}, {half_width, half_width, half_width}, h);
  return std::make_unique<Problem>(atoms, params, classify_sphere(grid, {0, 0, 0}, 2.0));
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kRunawayEnergy = 1e8;

/// Decides the step size and when to stop.
class StepPolicy {
 public:
  virtual ~StepPolicy() = default;
  virtual double dt() const = 0;
  virtual void record(double rel_u, double rel_e, double abs_u, double delta_e) = 0;
  virtual bool stop(double t, double delta_e) const = 0;
  virtual double error() const { return 0.0; }
  virtual double factor() const { return 1.0; }
};

class ControllerPolicy final : public StepPolicy {
 public:
  explicit ControllerPolicy(const ControllerConfig& cfg) : ctl_(cfg) {}
  double dt() const override { return ctl_.dt(); }
  void record(double rel_u, double rel_e, double abs_u, double delta_e) override {
    ctl_.update(rel_u, rel_e, abs_u, delta_e);
  }
  bool stop(double t, double delta_e) const override { return ctl_.should_stop(t, delta_e); }
  double error() const override { return ctl_.last_error(); }
  double factor() const override { return ctl_.last_factor(); }

 private:
  Controller ctl_;
};

class SchedulePolicy final : public StepPolicy {
 public:
  SchedulePolicy(std::vector<ScheduleSwitch> switches, double t_end) : switches_(std::move(switches)), t_end_(t_end) {}
  double dt() const override {
    double dt = switches_.front().dt;
    for (const ScheduleSwitch& s : switches_)
      if (time_reached(t_, s.t_switch)) dt = s.dt;
    return dt;
  }
  void record(double rel_u, double, double, double) override {
    t_ += dt();
    err_ = rel_u;
  }
  bool stop(double t, double) const override { return time_reached(t, t_end_); }
  double error() const override { return err_; }

 private:
  std::vector<ScheduleSwitch> switches_;
  double t_end_;
  double t_ = 0.0;
  double err_ = 0.0;
};

class LpbPolicy final : public StepPolicy {
 public:
  double dt() const override { return 0.01; }
  void record(double, double, double, double) override {}
  bool stop(double t, double delta_e) const override { return delta_e < 1e-3 || time_reached(t, 10.0); }
};

double l2_diff(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a[n] - b[n];
    s += d * d;
  }
  return std::sqrt(s);
}

double l2(const Field& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

RunResult pseudo_time_loop(const Problem& problem, Scheme scheme, Reaction reaction, Field u, StepPolicy& policy,
                           double t_end, std::ostream* trace_csv) {
  const auto start = Clock::now();
  SplitStepper stepper(problem.op(), problem.kappa_sq(), scheme, reaction);
  RunResult result{{}, std::move(u)};
  EnergyTrace& tr = result.trace;
  Field& field = result.u;
  tr.initial_energy = problem.energy(field);
  tr.final_energy = tr.initial_energy;
  if (trace_csv) write_trace_header(*trace_csv);

  Field previous = field;
  double t = 0.0;
  double energy = tr.initial_energy;
  std::size_t step = 0;
  while (!time_reached(t, t_end)) {
    const double dt = policy.dt();
    previous = field;
    stepper.step(field, dt);
    ++step;
    t += dt;
    const double e_new = problem.energy(field);
    if (!std::isfinite(e_new) || std::abs(e_new) > kRunawayEnergy || !field.all_finite())
      throw DivergenceError("non-finite field or runaway energy", step);
    const double delta_e = std::abs(e_new - energy);
    const double abs_u = l2_diff(field, previous);
    const double norm_u = l2(field);
    const double rel_u = norm_u > 0.0 ? abs_u / norm_u : -1.0;
    const double rel_e = e_new != 0.0 ? delta_e / std::abs(e_new) : -1.0;
    policy.record(rel_u, rel_e, abs_u, delta_e);
    energy = e_new;

    const StepRecord rec{step, t, dt, energy, delta_e, policy.error(), policy.factor()};
    tr.records.push_back(rec);
    if (trace_csv) write_trace_row(*trace_csv, rec.step, rec.t, rec.dt, rec.error, rec.factor, rec.energy, rec.delta_e);
    if (policy.stop(t, delta_e)) break;
  }
  tr.final_energy = energy;
  tr.final_time = t;
  tr.steps = step;
  tr.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

}  // namespace

Field initial_condition(InitialKind kind, const Problem& problem, Scheme scheme) {
  Field u = problem.boundary();
  if (kind == InitialKind::Zero) return u;
  LpbPolicy policy;
  try {
    return pseudo_time_loop(problem, scheme, Reaction::Linear, std::move(u), policy, 10.0, nullptr).u;
  } catch (const DivergenceError& e) {
    throw NumericalError(std::string("linearized initial solve diverged: ") + e.what());
  }
}

RunResult run(const Problem& problem, const RunConfig& config) {
  return run_from(problem, config, initial_condition(config.ic, problem, config.scheme));
}

RunResult run_from(const Problem& problem, const RunConfig& config, Field u0) {
  if (!(u0.grid() == problem.grid())) throw ValidationError("initial field is on a different grid");
  ControllerPolicy policy(config.controller);
  return pseudo_time_loop(problem, config.scheme, config.reaction, std::move(u0), policy, config.controller.t_end,
                          config.trace_csv);
}

RunResult run_schedule(const Problem& problem, const RunConfig& config, const std::vector<ScheduleSwitch>& switches) {
  if (switches.empty()) throw ValidationError("schedule needs at least one segment");
  for (std::size_t i = 0; i < switches.size(); ++i) {
    if (!(switches[i].dt > 0.0)) throw ValidationError("schedule step must be positive");
    if (!(switches[i].t_switch >= 0.0)) throw ValidationError("switch time must be nonnegative");
    if (i > 0 && !(switches[i].t_switch > switches[i - 1].t_switch))
      throw ValidationError("switch times must increase");
  }
  SchedulePolicy policy(switches, config.controller.t_end);
  return pseudo_time_loop(problem, config.scheme, config.reaction, initial_condition(config.ic, problem, config.scheme),
                          policy, config.controller.t_end, config.trace_csv);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

ConvergenceTable convergence_study(const std::function<double(double)>& solve, std::vector<double> resolutions) {
  if (resolutions.size() < 3) throw ValidationError("a convergence study needs at least 3 resolutions");
  std::sort(resolutions.begin(), resolutions.end(), std::greater<>());
  for (double r : resolutions)
    if (!(r > 0.0)) throw ValidationError("resolutions must be positive");

  ConvergenceTable table;
  for (double r : resolutions) {
    ConvergenceRow row;
    row.resolution = r;
    try {
      row.energy = solve(r);
    } catch (const DivergenceError& e) {
      row.diverged = true;
      row.energy = std::numeric_limits<double>::quiet_NaN();
      row.message = e.what();
    }
    table.rows.push_back(row);
  }
  const ConvergenceRow& ref = table.rows.back();
  if (ref.diverged) {
    table.rate = std::numeric_limits<double>::quiet_NaN();
    table.message = "reference run diverged";
    return table;
  }
  table.reference_energy = ref.energy;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    ConvergenceRow& row = table.rows[i];
    if (row.diverged) continue;
    row.rel_error = std::abs((row.energy - ref.energy) / ref.energy);
    xs.push_back(row.resolution);
    ys.push_back(row.rel_error);
  }
  if (xs.size() < 2) {
    table.rate = std::numeric_limits<double>::quiet_NaN();
    table.message = "fewer than two usable runs";
  } else if (std::any_of(ys.begin(), ys.end(), [](double e) { return !(e > 0.0); })) {
    table.rate = std::numeric_limits<double>::quiet_NaN();
    table.message = "zero error against the reference; rate undefined";
  } else {
    table.rate = loglog_slope(xs, ys);
  }
  return table;
}

Field recover_potential(const Field& u, const Problem& problem, PotentialMode mode) {
  if (!(u.grid() == problem.grid())) throw ValidationError("field is on a different grid");
  Field out = u;
  if (mode == PotentialMode::U) return out;
  const Grid& g = problem.grid();
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!problem.interface().inside(n)) continue;
    const Vec3 p = g.node(g.unravel(n));
    try {
      out[n] += green_potential(problem.atoms(), p, problem.params());
    } catch (const SingularityError&) {
      double q = 0.0;
      for (const Atom& a : problem.atoms())
        if (distance(a.center, p) <= kSingularityGuard) q += a.charge;
      out[n] = q == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                        : std::copysign(std::numeric_limits<double>::infinity(), q);
    }
  }
  return out;
}

void export_potential(const std::string& path, const Field& u, const Problem& problem, PotentialMode mode,
                      FieldFormat format) {
  const Field out = recover_potential(u, problem, mode);
  std::ofstream file(path, format == FieldFormat::Binary ? std::ios::binary : std::ios::out);
  if (!file) throw IoError("cannot open " + path + " for writing");
  if (format == FieldFormat::Binary)
    write_field_binary(file, out);
  else
    write_field_csv(file, out);
  if (!file) throw IoError("failed writing " + path);
}

}  // namespace pbgfm
