#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbgfm/driver.hpp"
#include "pbgfm/error.hpp"

using nlohmann::json;
using namespace pbgfm;

namespace {

enum Exit { kOk = 0, kConfig = 2, kDiverged = 3, kIo = 4 };

struct Physics {
  double eps_in = 1.0;
  double eps_out = 80.0;
  std::optional<double> ionic;
  std::optional<double> kappa_sq;

  PhysicalParams params(double default_kappa_sq) const {
    if (ionic && kappa_sq) throw ValidationError("give either --ionic or --kappa-sq, not both");
    if (ionic) return PhysicalParams::with_ionic_strength(eps_in, eps_out, *ionic);
    return PhysicalParams::with_kappa_sq(eps_in, eps_out, kappa_sq.value_or(default_kappa_sq));
  }
};

struct Stepping {
  std::string scheme = "adi";
  std::string controller = "constant";
  std::string ic = "zero";
  std::optional<double> dt, dt_min, dt_max, tol, t_end, t_min_stop;

  RunConfig config() const {
    RunConfig cfg;
    if (scheme == "adi") cfg.scheme = Scheme::ADI;
    else if (scheme == "lod") cfg.scheme = Scheme::LOD;
    else throw ValidationError("unknown scheme '" + scheme + "'");
    const auto kind = parse_controller(controller);
    if (!kind) throw ValidationError("unknown controller '" + controller + "'");
    cfg.controller = ControllerConfig::defaults(*kind);
    auto& c = cfg.controller;
    if (dt) c.dt = *dt;
    if (dt_min) c.dt_min = *dt_min;
    if (dt_max) c.dt_max = *dt_max;
    if (tol) c.tol = *tol;
    if (t_end) c.t_end = *t_end;
    if (t_min_stop) c.t_min_stop = *t_min_stop;
    if (ic == "zero") cfg.ic = InitialKind::Zero;
    else if (ic == "lpb") cfg.ic = InitialKind::Lpb;
    else throw ValidationError("unknown initial condition '" + ic + "'");
    c.validate();
    return cfg;
  }
};

void add_physics(CLI::App* app, Physics& p) {
  app->add_option("--eps-in", p.eps_in, "solute permittivity")->capture_default_str();
  app->add_option("--eps-out", p.eps_out, "solvent permittivity")->capture_default_str();
  app->add_option("--ionic", p.ionic, "ionic strength in mol/L");
  app->add_option("--kappa-sq", p.kappa_sq, "Debye parameter kappa^2, overriding --ionic");
}

void add_stepping(CLI::App* app, Stepping& s) {
  app->add_option("--scheme", s.scheme, "adi or lod")->capture_default_str();
  app->add_option("--controller", s.controller, "constant|manual1|manual2|pid1|pid2|fastpid|nipid")
      ->capture_default_str();
  app->add_option("--dt", s.dt, "time step (constant controller) ");
  app->add_option("--dt-min", s.dt_min, "smallest adaptive step");
  app->add_option("--dt-max", s.dt_max, "largest adaptive step");
  app->add_option("--tol", s.tol, "energy-difference stopping tolerance");
  app->add_option("--tend", s.t_end, "pseudo-time horizon");
  app->add_option("--tmin-stop", s.t_min_stop, "earliest time the tolerance stop may fire");
  app->add_option("--ic", s.ic, "zero or lpb")->capture_default_str();
}

json trace_summary(const EnergyTrace& t) {
  return {{"energy", t.final_energy},
          {"initial_energy", t.initial_energy},
          {"steps", t.steps},
          {"t", t.final_time},
          {"wall_seconds", t.wall_seconds}};
}

void print(const json& j, bool as_json) {
  if (as_json) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  for (const auto& [k, v] : j.items()) std::cout << k << ": " << v.dump() << '\n';
}

/// Linearized reaction-field energy of a central charge q in a sphere of radius R.
double central_charge_energy(double q, double radius, const PhysicalParams& p) {
  const double kbar = std::sqrt(p.kappa_sq / p.eps_out);
  return 0.5 * kCoulombKcal * q * q / radius * (1.0 / (p.eps_out * (1.0 + kbar * radius)) - 1.0 / p.eps_in);
}

std::unique_ptr<Problem> problem_for(const std::string& atoms_path, double h, const std::string& surface,
                                     const PhysicalParams& params, double half_width) {
  if (atoms_path.empty()) return kirkwood_problem(h, params.kappa_sq, half_width);
  return make_problem(load_atoms(atoms_path), params, h, parse_surface(surface));
}

std::vector<ScheduleSwitch> parse_switches(const std::vector<std::string>& items) {
  std::vector<ScheduleSwitch> out;
  for (const auto& s : items) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ValidationError("switch '" + s + "' is not of the form t:dt");
    try {
      out.push_back({std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ValidationError("switch '" + s + "' is not numeric");
    }
  }
  return out;
}

std::vector<double> parse_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) {
        try {
          out.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw ValidationError("value '" + tok + "' is not numeric");
        }
      }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-time ghost-fluid Poisson-Boltzmann solver"};
  // --h is the grid spacing, so help is long-form only
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "print results as JSON");

  // solve
  auto* solve = app.add_subcommand("solve", "solve for one molecule");
  std::string atoms_path, surface = "ses-grid", trace_path, field_path, field_mode = "u", field_format = "bin";
  double h = 0.5, probe = kDefaultProbeRadius;
  Physics phys;
  Stepping stepping;
  stepping.controller = "nipid";
  solve->add_option("--atoms", atoms_path, "PQR or xyzrq file")->required();
  solve->add_option("--h", h, "grid spacing")->capture_default_str();
  solve->add_option("--surface", surface, "sphere|vdw|ses-grid|import:PATH")->capture_default_str();
  solve->add_option("--probe", probe, "probe radius")->capture_default_str();
  add_physics(solve, phys);
  add_stepping(solve, stepping);
  solve->add_option("--trace", trace_path, "controller trace CSV");
  solve->add_option("--field", field_path, "potential dump");
  solve->add_option("--field-mode", field_mode, "u or phi")->capture_default_str();
  solve->add_option("--field-format", field_format, "bin or csv")->capture_default_str();

  // kirkwood
  auto* kw = app.add_subcommand("kirkwood", "unit charge in a sphere of radius 2");
  double kw_h = 0.25, half_width = 8.0;
  Physics kw_phys;
  Stepping kw_step;
  kw_step.dt = 0.001;
  kw_step.t_min_stop = 1.0;
  kw->add_option("--h", kw_h, "grid spacing")->capture_default_str();
  kw->add_option("--half-width", half_width, "box half width")->capture_default_str();
  add_physics(kw, kw_phys);
  add_stepping(kw, kw_step);

  // convergence
  auto* conv = app.add_subcommand("convergence", "self-convergence in h or dt");
  std::string vary = "h", conv_atoms, conv_surface = "ses-grid";
  std::vector<std::string> values_raw;
  double conv_h = 0.5;
  Physics conv_phys;
  Stepping conv_step;
  conv_step.dt = 0.01;
  conv_step.t_min_stop = 1.0;
  conv->add_option("--vary", vary, "h or dt")->check(CLI::IsMember({"h", "dt"}))->capture_default_str();
  conv->add_option("--values", values_raw, "resolutions; the smallest is the reference")->required();
  conv->add_option("--h", conv_h, "spacing when varying dt")->capture_default_str();
  conv->add_option("--atoms", conv_atoms, "molecule (default: built-in sphere)");
  conv->add_option("--surface", conv_surface, "surface kind with --atoms")->capture_default_str();
  add_physics(conv, conv_phys);
  add_stepping(conv, conv_step);

  // schedule
  auto* sched = app.add_subcommand("schedule", "piecewise-constant time steps");
  std::vector<std::string> switches_raw;
  std::string sched_atoms, sched_surface = "ses-grid";
  double sched_h = 0.5;
  std::optional<double> reference_dt;
  Physics sched_phys;
  Stepping sched_step;
  sched_step.t_end = 10.0;
  sched_step.ic = "lpb";
  sched->add_option("--switch", switches_raw, "t:dt, dt applies from the first step with t >= t_switch")
      ->required();
  sched->add_option("--atoms", sched_atoms, "molecule (default: built-in sphere)");
  sched->add_option("--surface", sched_surface, "surface kind with --atoms")->capture_default_str();
  sched->add_option("--h", sched_h, "grid spacing")->capture_default_str();
  sched->add_option("--reference-dt", reference_dt, "also run a constant-step reference");
  add_physics(sched, sched_phys);
  add_stepping(sched, sched_step);

  // compare-controllers
  auto* cmp = app.add_subcommand("compare-controllers", "every controller against a constant-step reference");
  std::string cmp_atoms, cmp_surface = "ses-grid";
  double cmp_h = 0.5, cmp_ref_dt = 0.01;
  Physics cmp_phys;
  Stepping cmp_step;
  cmp_step.ic = "lpb";
  cmp->add_option("--atoms", cmp_atoms, "molecule (default: built-in sphere)");
  cmp->add_option("--surface", cmp_surface, "surface kind with --atoms")->capture_default_str();
  cmp->add_option("--h", cmp_h, "grid spacing")->capture_default_str();
  cmp->add_option("--reference-dt", cmp_ref_dt, "constant step of the reference")->capture_default_str();
  add_physics(cmp, cmp_phys);
  add_stepping(cmp, cmp_step);

  // scaling
  auto* scale = app.add_subcommand("scaling", "wall time per step against node count");
  std::vector<std::string> sizes_raw{"33,49,65,81,97"};
  int scale_steps = 10;
  std::string scale_scheme = "adi";
  scale->add_option("--sizes", sizes_raw, "nodes per side")->capture_default_str();
  scale->add_option("--steps", scale_steps, "timed steps per size")->capture_default_str()->check(CLI::PositiveNumber);
  scale->add_option("--scheme", scale_scheme, "adi or lod")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->set_help_flag("--help", "print this help and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*solve) {
      PhysicalParams params = phys.params(0.0);
      SurfaceSpec spec = parse_surface(surface);
      spec.probe_radius = probe;
      auto problem = make_problem(load_atoms(atoms_path), params, h, spec);
      RunConfig cfg = stepping.config();
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw IoError("cannot write " + trace_path);
        cfg.trace_csv = &trace;
      }
      const RunResult r = run(*problem, cfg);
      if (!field_path.empty()) {
        if (field_mode != "u" && field_mode != "phi") throw ValidationError("field mode must be u or phi");
        if (field_format != "bin" && field_format != "csv") throw ValidationError("field format must be bin or csv");
        export_potential(field_path, r.u, *problem, field_mode == "u" ? PotentialMode::U : PotentialMode::Phi,
                         field_format == "bin" ? FieldFormat::Binary : FieldFormat::Csv);
      }
      json out = trace_summary(r.trace);
      const auto& n = problem->grid().dims();
      out["grid"] = {n[0], n[1], n[2]};
      print(out, as_json);
    } else if (*kw) {
      const PhysicalParams params = kw_phys.params(1.0);
      auto problem = kirkwood_problem(kw_h, params.kappa_sq, half_width);
      const RunResult r = run(*problem, kw_step.config());
      json out = trace_summary(r.trace);
      out["linear_analytic"] = central_charge_energy(1.0, 2.0, problem->params());
      const auto& n = problem->grid().dims();
      out["grid"] = {n[0], n[1], n[2]};
      print(out, as_json);
    } else if (*conv) {
      const PhysicalParams params = conv_phys.params(1.0);
      const RunConfig base = conv_step.config();
      auto solve_at = [&](double res) {
        RunConfig cfg = base;
        const double hh = vary == "h" ? res : conv_h;
        if (vary == "dt") cfg.controller.dt = res;
        auto problem = problem_for(conv_atoms, hh, conv_surface, params, 8.0);
        const double e = run(*problem, cfg).trace.final_energy;
        if (!as_json) std::fprintf(stderr, "%s=%g E=%.9f\n", vary.c_str(), res, e);
        return e;
      };
      const ConvergenceTable t = convergence_study(solve_at, parse_list(values_raw));
      json rows = json::array();
      for (const auto& r : t.rows)
        rows.push_back({{vary, r.resolution},
                        {"energy", r.energy},
                        {"rel_error", r.rel_error},
                        {"diverged", r.diverged},
                        {"message", r.message}});
      json out{{"rows", rows}, {"reference_energy", t.reference_energy}, {"message", t.message}};
      out["rate"] = std::isfinite(t.rate) ? json(t.rate) : json(nullptr);
      print(out, as_json);
    } else if (*sched) {
      const PhysicalParams params = sched_phys.params(1.0);
      auto problem = problem_for(sched_atoms, sched_h, sched_surface, params, 8.0);
      const RunConfig cfg = sched_step.config();
      const RunResult r = run_schedule(*problem, cfg, parse_switches(switches_raw));
      json out = trace_summary(r.trace);
      if (reference_dt) {
        const RunResult ref = run_schedule(*problem, cfg, {{0.0, *reference_dt}});
        out["reference_energy"] = ref.trace.final_energy;
        out["rel_error"] = std::abs((r.trace.final_energy - ref.trace.final_energy) / ref.trace.final_energy);
      }
      print(out, as_json);
    } else if (*cmp) {
      const PhysicalParams params = cmp_phys.params(1.0);
      auto problem = problem_for(cmp_atoms, cmp_h, cmp_surface, params, 8.0);
      RunConfig ref_cfg = cmp_step.config();
      ref_cfg.controller = ControllerConfig::defaults(ControllerKind::Constant);
      ref_cfg.controller.dt = cmp_ref_dt;
      const RunResult ref = run(*problem, ref_cfg);
      json rows = json::array();
      for (auto kind : {ControllerKind::Manual1, ControllerKind::Manual2, ControllerKind::PID1, ControllerKind::PID2,
                        ControllerKind::FastPID, ControllerKind::NonincreasingPID}) {
        Stepping s = cmp_step;
        s.controller = std::string(controller_name(kind));
        json row{{"controller", s.controller}};
        try {
          const RunResult r = run(*problem, s.config());
          row.update(trace_summary(r.trace));
          row["rel_error"] = std::abs((r.trace.final_energy - ref.trace.final_energy) / ref.trace.final_energy);
          row["relative_steps"] = static_cast<double>(r.trace.steps) / static_cast<double>(ref.trace.steps);
        } catch (const DivergenceError& e) {
          row["diverged"] = e.what();
        }
        rows.push_back(row);
      }
      print({{"reference", trace_summary(ref.trace)}, {"controllers", rows}}, as_json);
    } else if (*scale) {
      std::vector<double> n_nodes, per_step;
      json rows = json::array();
      for (double side : parse_list(sizes_raw)) {
        if (side < 5 || side != std::floor(side)) throw ValidationError("sizes must be integers >= 5");
        auto problem = kirkwood_problem(16.0 / (side - 1.0), 1.0);
        Field u = initial_condition(InitialKind::Zero, *problem);
        SplitStepper stepper(problem->op(), problem->kappa_sq(), scale_scheme == "lod" ? Scheme::LOD : Scheme::ADI);
        stepper.step(u, 0.01);
        const auto t0 = std::chrono::steady_clock::now();
        for (int s = 0; s < scale_steps; ++s) stepper.step(u, 0.01);
        const double per = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / scale_steps;
        const double n = static_cast<double>(problem->grid().size());
        n_nodes.push_back(n);
        per_step.push_back(per);
        rows.push_back({{"side", side}, {"nodes", n}, {"seconds_per_step", per}});
      }
      json out{{"rows", rows}};
      if (n_nodes.size() >= 2) out["slope"] = loglog_slope(n_nodes, per_step);
      print(out, as_json);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kDiverged;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
