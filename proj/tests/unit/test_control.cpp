#include <random>
#include <sstream>

#include "doctest.h"
#include "pbgfm/control.hpp"
#include "pbgfm/error.hpp"

using namespace pbgfm;

namespace {

ControllerState history(double e2, double e1, double e0) {
  ControllerState s;
  s.e_n2 = e2;
  s.e_n1 = e1;
  s.e_n = e0;
  s.history = 3;
  return s;
}

}  // namespace

TEST_CASE("error norms") {
  const Grid g({0, 0, 0}, 1.0, {4, 4, 4});
  Field a(g, 2.0);
  CHECK(error_norm(ErrorKind::U, a, a, 0, 0) == 0.0);
  CHECK(error_norm(ErrorKind::E, a, a, -100.0, -101.0) == doctest::Approx(0.01));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r(-1.0, 1.0);
  Field b(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    a[n] = r(rng);
    b[n] = r(rng);
  }
  double num = 0, den = 0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    num += (a[n] - b[n]) * (a[n] - b[n]);
    den += a[n] * a[n];
  }
  CHECK(error_norm(ErrorKind::U, a, b, 0, 0) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-13));
  CHECK(error_norm(ErrorKind::U, Field(g), b, 0, 0) < 0.0);
  CHECK(error_norm(ErrorKind::E, a, b, 0.0, 1.0) < 0.0);
}

TEST_CASE("PID factor") {
  const auto cfg = ControllerConfig::defaults(ControllerKind::PID1);
  const double ep = cfg.eps_p;
  CHECK(pid_factor(history(ep, ep, ep), cfg) == doctest::Approx(1.0));
  // shrinking errors: e_n = e_{n-1}/2 = e_{n-2}/4 = eps_p
  CHECK(pid_factor(history(4 * ep, 2 * ep, ep), cfg) == doctest::Approx(std::pow(2.0, 0.075)).epsilon(1e-14));
  // clamping
  CHECK(pid_factor(history(1e-30, 1e-30, 1e6), cfg) == 0.2);
  CHECK(pid_factor(history(1e6, 1e6, 1e-30), cfg) == 5.0);
  // nonpositive errors fall back to eps_p
  CHECK(pid_factor(history(0.0, -1.0, 0.0), cfg) == doctest::Approx(1.0));
  ControllerState warm = history(1, 1, 1);
  warm.history = 2;
  CHECK(pid_factor(warm, cfg) == 1.0);
}

TEST_CASE("NonincreasingPID never grows the step") {
  auto cfg = ControllerConfig::defaults(ControllerKind::NonincreasingPID);
  cfg.dt_max = 1.0;
  Controller c(cfg);
  CHECK(c.dt() == 1.0);
  // large errors push raw F below 1; the step must not grow past its current value
  double prev = c.dt();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> e(1e-6, 1.0);
  for (int i = 0; i < 200; ++i) {
    c.update(e(rng), 0.0, 0.0, 1.0);
    CHECK(c.dt() <= prev);
    CHECK(c.last_factor() >= 1.0);
    CHECK(c.dt() >= cfg.dt_min);
    prev = c.dt();
  }
  // raw F = 0.5 leaves dt unchanged
  Controller d(cfg);
  for (int i = 0; i < 3; ++i) d.update(cfg.eps_p, 0, 0, 1);
  const double before = d.dt();
  auto raw = history(cfg.eps_p, cfg.eps_p, cfg.eps_p * std::pow(2.0, 1.0 / 0.25));
  CHECK(pid_factor(raw, cfg) < 1.0);
  d.update(raw.e_n, 0, 0, 1);
  CHECK(d.dt() == before);
}

TEST_CASE("PID1 step stays within bounds") {
  auto cfg = ControllerConfig::defaults(ControllerKind::PID1);
  Controller c(cfg);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> e(1e-8, 10.0);
  for (int i = 0; i < 500; ++i) {
    c.update(e(rng), 0, 0, 1);
    CHECK(c.dt() >= cfg.dt_min);
    CHECK(c.dt() <= cfg.dt_max);
    CHECK(c.last_factor() >= 0.2);
    CHECK(c.last_factor() <= 5.0);
  }
}

TEST_CASE("manual halving") {
  const auto cfg = ControllerConfig::defaults(ControllerKind::Manual1);
  ControllerState s;
  s.dt = 1.0;
  s.delta = 1.0;
  manual_update(s, cfg, 2.0);
  CHECK(s.dt == 1.0);
  CHECK(s.delta == 1.0);
  manual_update(s, cfg, 0.5);
  CHECK(s.dt == 0.5);
  CHECK(s.delta == 0.5);
  s.dt = cfg.dt_min;
  manual_update(s, cfg, 0.1);
  CHECK(s.dt == cfg.dt_min);
  CHECK(s.delta == 0.25);

  Controller m2(ControllerConfig::defaults(ControllerKind::Manual2));
  CHECK(m2.dt() == 1.0);
  m2.update(0.0, 0.0, 5.0, 0.3);
  CHECK(m2.dt() == 0.5);
  m2.update(0.0, 0.0, 5.0, 0.3);
  CHECK(m2.dt() == 0.25);
  m2.update(0.0, 0.0, 5.0, 0.3);
  CHECK(m2.dt() == 0.25);
}

TEST_CASE("stopping predicates") {
  auto cfg = ControllerConfig::defaults(ControllerKind::Constant);
  ControllerState s;
  CHECK_FALSE(should_stop(3.0, 1e-9, s, cfg));
  CHECK(should_stop(5.0, 1e-9, s, cfg));
  CHECK_FALSE(should_stop(6.0, 1.0, s, cfg));
  for (auto kind : {ControllerKind::Constant, ControllerKind::Manual1, ControllerKind::Manual2, ControllerKind::PID1,
                    ControllerKind::PID2, ControllerKind::FastPID, ControllerKind::NonincreasingPID})
    CHECK(should_stop(50.0, 1.0, s, ControllerConfig::defaults(kind)));

  auto ni = ControllerConfig::defaults(ControllerKind::NonincreasingPID);
  s.dt = 0.5;
  CHECK_FALSE(should_stop(10.0, 1e-5, s, ni));
  s.reached_min = true;
  CHECK(should_stop(10.0, 1e-5, s, ni));

  auto fast = ControllerConfig::defaults(ControllerKind::FastPID);
  ControllerState f;
  f.reached_min = true;
  f.steps_since_min = 99;
  CHECK_FALSE(should_stop(10.0, 1.0, f, fast));
  f.steps_since_min = 100;
  CHECK(should_stop(10.0, 1.0, f, fast));
  CHECK(time_reached(0.1 + 0.2, 0.3));
}

TEST_CASE("FastPID counts steps taken at the floor") {
  auto cfg = ControllerConfig::defaults(ControllerKind::FastPID);
  cfg.dt_max = cfg.dt_min;
  Controller c(cfg);
  for (int i = 0; i < 100; ++i) c.update(cfg.eps_p, 0, 0, 1);
  CHECK(c.state().reached_min);
  CHECK(c.state().steps_since_min == 100);
  CHECK(c.should_stop(6.0, 1.0));
}

TEST_CASE("controller config validation and names") {
  auto cfg = ControllerConfig::defaults(ControllerKind::PID2);
  CHECK(cfg.tol == 1e-4);
  CHECK(ControllerConfig::defaults(ControllerKind::NonincreasingPID).tol == 0.01);
  cfg.dt_min = 2.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  CHECK(parse_controller("NIPID") == ControllerKind::NonincreasingPID);
  CHECK(parse_controller("fastpid") == ControllerKind::FastPID);
  CHECK_FALSE(parse_controller("pid3").has_value());
  CHECK(controller_name(ControllerKind::Manual2) == "manual2");
  std::ostringstream out;
  write_trace_header(out);
  write_trace_row(out, 1, 0.5, 0.5, 0.01, 1.0, -80.0, 2.0);
  CHECK(out.str() == "step,t,dt,e_n,F,E_sol,dE\n1,0.5,0.5,0.01,1,-80,2\n");
}

TEST_CASE("controller traces are deterministic") {
  auto cfg = ControllerConfig::defaults(ControllerKind::PID1);
  Controller a(cfg), b(cfg);
  for (int i = 0; i < 50; ++i) {
    const double e = 0.001 * (1 + (i * 37) % 11);
    a.update(e, 0, 0, 1);
    b.update(e, 0, 0, 1);
    CHECK(a.dt() == b.dt());
  }
}
