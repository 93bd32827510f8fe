#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pbgfm/driver.hpp"
#include "pbgfm/error.hpp"

using namespace pbgfm;

namespace {

RunConfig constant(double dt, double t_end, double tol = 1e-4) {
  RunConfig cfg;
  cfg.controller = ControllerConfig::defaults(ControllerKind::Constant);
  cfg.controller.dt = dt;
  cfg.controller.t_end = t_end;
  cfg.controller.tol = tol;
  return cfg;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pbgfm_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("problem assembly") {
  const auto p = kirkwood_problem(1.0, 1.0);
  CHECK(p->grid().dims() == std::array<std::size_t, 3>{17, 17, 17});
  const std::size_t centre = p->grid().index(8, 8, 8);
  CHECK(p->interface().inside(centre));
  CHECK(p->kappa_sq()[centre] == 0.0);
  CHECK(p->kappa_sq()[0] == 1.0);
  CHECK(p->boundary()[0] == doctest::Approx(dirichlet_boundary(p->atoms(), p->grid().node(0, 0, 0), p->params())));
  CHECK(p->boundary()[centre] == 0.0);

  const AtomSet atoms({Atom{{0, 0, 0}, 1.0, 2.0}});
  const Grid g({-3, -3, -3}, 1.0, {7, 7, 7});
  const InterfaceData all_solute(g, std::vector<std::uint8_t>(g.size(), 1), {});
  CHECK_THROWS_AS(Problem(atoms, PhysicalParams{}, all_solute), ValidationError);
  CHECK(parse_surface("import:/tmp/x").import_path == "/tmp/x");
  CHECK_THROWS_AS(parse_surface("msms"), ValidationError);
  CHECK_THROWS_AS(make_problem(AtomSet({Atom{{0, 0, 0}, 1, 1}, Atom{{1, 0, 0}, 1, 1}}), PhysicalParams{}, 0.5,
                               parse_surface("sphere")),
                  ValidationError);
}

TEST_CASE("zero initial condition") {
  const auto p = kirkwood_problem(1.0, 1.0);
  const Field u = initial_condition(InitialKind::Zero, *p);
  for (std::size_t n = 0; n < u.size(); ++n)
    CHECK(u[n] == (p->grid().is_boundary(n) ? p->boundary()[n] : 0.0));
}

TEST_CASE("T_end = 0 takes no steps") {
  const auto p = kirkwood_problem(1.0, 1.0);
  const RunResult r = run(*p, constant(0.01, 0.0));
  CHECK(r.trace.steps == 0);
  CHECK(r.trace.records.empty());
  CHECK(r.trace.final_energy == r.trace.initial_energy);
  CHECK(r.trace.final_energy == 0.0);
}

TEST_CASE("runs are deterministic and traces well formed") {
  const auto p = kirkwood_problem(1.0, 1.0);
  RunConfig cfg = RunConfig{};
  cfg.controller.t_end = 8.0;
  std::ostringstream csv;
  cfg.trace_csv = &csv;
  const RunResult a = run(*p, cfg);
  cfg.trace_csv = nullptr;
  const RunResult b = run(*p, cfg);
  REQUIRE(a.trace.steps == b.trace.steps);
  for (std::size_t i = 0; i < a.trace.steps; ++i) {
    CHECK(a.trace.records[i].energy == b.trace.records[i].energy);
    CHECK(a.trace.records[i].dt == b.trace.records[i].dt);
    if (i > 0) CHECK(a.trace.records[i].t > a.trace.records[i - 1].t);
  }
  CHECK(a.u == b.u);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(a.trace.steps + 1));
}

TEST_CASE("single-segment schedule equals the constant run") {
  const auto p = kirkwood_problem(1.0, 1.0);
  const RunConfig cfg = constant(0.05, 2.0, 1e-30);
  const RunResult c = run(*p, cfg);
  const RunResult s = run_schedule(*p, cfg, {{0.0, 0.05}});
  REQUIRE(c.trace.steps == s.trace.steps);
  CHECK(c.trace.steps == 40);
  CHECK(c.trace.final_energy == s.trace.final_energy);

  const RunResult two = run_schedule(*p, cfg, {{0.0, 0.1}, {1.0, 0.05}});
  CHECK(two.trace.steps == 30);
  CHECK(two.trace.records[9].dt == 0.1);
  CHECK(two.trace.records[10].dt == 0.05);
  CHECK_THROWS_AS(run_schedule(*p, cfg, {{1.0, 0.1}, {0.5, 0.1}}), ValidationError);
}

TEST_CASE("without salt the linearized start is already the answer") {
  const auto p = kirkwood_problem(1.0, 0.0);
  const Field lpb = initial_condition(InitialKind::Lpb, *p);
  RunConfig cfg = constant(0.01, 30.0, 1e-12);
  const RunResult zero = run(*p, cfg);
  // the linearized pre-solve stops at an energy difference of 1e-3 per step
  CHECK(std::abs(p->energy(lpb) - zero.trace.final_energy) < 0.1);
  cfg.ic = InitialKind::Lpb;
  const RunResult from_lpb = run(*p, cfg);
  CHECK(from_lpb.trace.final_energy == doctest::Approx(zero.trace.final_energy).epsilon(1e-8));
}

TEST_CASE("non-finite fields abort with the step index") {
  const auto p = kirkwood_problem(1.0, 1.0);
  Field u = p->boundary();
  u[p->grid().index(3, 3, 3)] = NAN;
  try {
    run_from(*p, constant(0.01, 1.0), u);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step() == 1);
  }
}

TEST_CASE("convergence study fits the slope") {
  const ConvergenceTable t = convergence_study([](double h) { return -80.0 + 3.0 * h * h; }, {1.0, 0.5, 0.25, 0.125});
  CHECK(t.rows.back().resolution == 0.125);
  CHECK(t.reference_energy == doctest::Approx(-80.0 + 3.0 / 64.0));
  CHECK(std::isfinite(t.rate));
  CHECK(t.rate > 1.9);

  const ConvergenceTable flat = convergence_study([](double) { return -5.0; }, {0.1, 0.2, 0.4});
  CHECK(std::isnan(flat.rate));
  CHECK_FALSE(flat.message.empty());

  const ConvergenceTable broken = convergence_study(
      [](double h) {
        if (h > 0.9) throw DivergenceError("boom", 3);
        return -1.0 - h;
      },
      {1.0, 0.5, 0.25, 0.125});
  CHECK(broken.rows.front().diverged);
  CHECK(std::isfinite(broken.rate));
  CHECK_THROWS_AS(convergence_study([](double) { return 1.0; }, {1.0, 0.5}), ValidationError);
  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
}

TEST_CASE("potential export") {
  const auto p = kirkwood_problem(1.0, 1.0);
  RunConfig cfg = constant(0.05, 1.0);
  const RunResult r = run(*p, cfg);

  const std::string upath = temp_path("u.bin"), fpath = temp_path("field.bin");
  export_potential(upath, r.u, *p, PotentialMode::U);
  {
    std::ofstream f(fpath, std::ios::binary);
    write_field_binary(f, r.u);
  }
  CHECK(slurp(upath) == slurp(fpath));

  const Field phi = recover_potential(r.u, *p, PotentialMode::Phi);
  const Grid& g = p->grid();
  const std::size_t centre = g.index(8, 8, 8);
  CHECK(std::isinf(phi[centre]));
  CHECK(phi[centre] > 0.0);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (n == centre) continue;
    if (p->interface().inside(n))
      CHECK(std::abs(phi[n] - (r.u[n] + green_potential(p->atoms(), g.node(g.unravel(n)), p->params()))) <= 1e-12 * std::abs(phi[n]));
    else
      CHECK(phi[n] == r.u[n]);
  }

  const AtomSet neutral({Atom{{0, 0, 0}, 0.0, 2.0}});
  const Problem q(neutral, p->params(), p->interface());
  Field u2 = r.u;
  u2[centre] = 0.0;
  CHECK(recover_potential(u2, q, PotentialMode::Phi).values()[1] == u2[1]);
  CHECK_THROWS_AS(export_potential("/nonexistent/dir/x.bin", r.u, *p, PotentialMode::U), IoError);
  std::filesystem::remove(upath);
  std::filesystem::remove(fpath);
}
