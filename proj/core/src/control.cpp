#include "pbgfm/control.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>

#include "pbgfm/error.hpp"

namespace pbgfm {

std::string_view controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Constant: return "constant";
    case ControllerKind::Manual1: return "manual1";
    case ControllerKind::Manual2: return "manual2";
    case ControllerKind::PID1: return "pid1";
    case ControllerKind::PID2: return "pid2";
    case ControllerKind::FastPID: return "fastpid";
    case ControllerKind::NonincreasingPID: return "nipid";
  }
  return "?";
}

std::optional<ControllerKind> parse_controller(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "constant") return ControllerKind::Constant;
  if (s == "manual1") return ControllerKind::Manual1;
  if (s == "manual2") return ControllerKind::Manual2;
  if (s == "pid1") return ControllerKind::PID1;
  if (s == "pid2") return ControllerKind::PID2;
  if (s == "fastpid") return ControllerKind::FastPID;
  if (s == "nipid" || s == "nonincreasingpid") return ControllerKind::NonincreasingPID;
  return std::nullopt;
}

ControllerConfig ControllerConfig::defaults(ControllerKind kind) {
  ControllerConfig c;
  c.kind = kind;
  c.tol = kind == ControllerKind::NonincreasingPID ? 0.01 : 1e-4;
  return c;
}

void ControllerConfig::validate() const {
  if (!(dt_min > 0.0) || !(dt_min <= dt_max) || !std::isfinite(dt_max))
    throw ValidationError("need 0 < dt_min <= dt_max");
  if (kind == ControllerKind::Constant && !(dt > 0.0 && std::isfinite(dt)))
    throw ValidationError("constant time step must be positive");
  if (!(f_lo > 0.0 && f_lo <= 1.0 && f_hi >= 1.0)) throw ValidationError("need 0 < F_lo <= 1 <= F_hi");
  if (!(tol > 0.0)) throw ValidationError("TOL must be positive");
  if (!(eps_p > 0.0)) throw ValidationError("eps_p must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("T_end must be finite and nonnegative");
  if (!(t_min_stop >= 0.0)) throw ValidationError("t_min_stop must be nonnegative");
}

ErrorKind pid_error_kind(ControllerKind kind) {
  return kind == ControllerKind::PID2 || kind == ControllerKind::Manual2 ? ErrorKind::E : ErrorKind::U;
}

double error_norm(ErrorKind kind, const Field& un, const Field& uprev, double en, double eprev) {
  if (kind == ErrorKind::E) {
    if (en == 0.0) return -1.0;
    return std::abs((en - eprev) / en);
  }
  if (un.size() != uprev.size()) throw ValidationError("fields differ in size");
  double diff = 0.0, base = 0.0;
  for (std::size_t n = 0; n < un.size(); ++n) {
    const double d = un[n] - uprev[n];
    diff += d * d;
    base += un[n] * un[n];
  }
  if (base == 0.0) return -1.0;
  return std::sqrt(diff / base);
}

double pid_factor(const ControllerState& s, const ControllerConfig& cfg) {
  if (s.history < 3) return 1.0;
  auto fix = [&](double e) { return e > 0.0 && std::isfinite(e) ? e : cfg.eps_p; };
  const double en = fix(s.e_n), en1 = fix(s.e_n1), en2 = fix(s.e_n2);
  const double f = std::pow(en1 / en, cfg.k_p) * std::pow(cfg.eps_p / en, cfg.k_i) *
                   std::pow(en1 * en1 / (en * en2), cfg.k_d);
  return std::clamp(f, cfg.f_lo, cfg.f_hi);
}

void manual_update(ControllerState& s, const ControllerConfig& cfg, double e) {
  if (e < s.delta) {
    s.dt = std::max(0.5 * s.dt, cfg.dt_min);
    s.delta *= 0.5;
  }
}

bool time_reached(double t, double target) { return t >= target - 1e-9 * std::max(1.0, std::abs(target)); }

bool should_stop(double t, double delta_e, const ControllerState& s, const ControllerConfig& cfg) {
  if (time_reached(t, cfg.t_end)) return true;
  if (!time_reached(t, cfg.t_min_stop)) return false;
  const bool small = delta_e < cfg.tol;
  switch (cfg.kind) {
    case ControllerKind::NonincreasingPID: return small && s.reached_min;
    case ControllerKind::FastPID: return small || (s.reached_min && s.steps_since_min >= cfg.post_min_steps);
    default: return small;
  }
}

Controller::Controller(const ControllerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  state_.dt = cfg_.kind == ControllerKind::Constant ? cfg_.dt : cfg_.dt_max;
  state_.delta = 1.0;
}

void Controller::update(double rel_u, double rel_e, double abs_u, double delta_e) {
  if (state_.dt <= cfg_.dt_min * (1.0 + 1e-12)) {
    if (state_.reached_min)
      ++state_.steps_since_min;
    else {
      state_.reached_min = true;
      state_.steps_since_min = 1;
    }
  }
  last_factor_ = 1.0;
  switch (cfg_.kind) {
    case ControllerKind::Constant:
      last_error_ = rel_u;
      return;
    case ControllerKind::Manual1:
    case ControllerKind::Manual2:
      last_error_ = cfg_.kind == ControllerKind::Manual1 ? abs_u : delta_e;
      manual_update(state_, cfg_, last_error_);
      return;
    default:
      break;
  }
  const double e = pid_error_kind(cfg_.kind) == ErrorKind::E ? rel_e : rel_u;
  last_error_ = e > 0.0 && std::isfinite(e) ? e : cfg_.eps_p;
  state_.e_n2 = state_.e_n1;
  state_.e_n1 = state_.e_n;
  state_.e_n = last_error_;
  ++state_.history;
  double f = pid_factor(state_, cfg_);
  if (cfg_.kind == ControllerKind::NonincreasingPID) f = std::max(f, 1.0);
  last_factor_ = f;
  state_.dt = std::clamp(state_.dt / f, cfg_.dt_min, cfg_.dt_max);
}

bool Controller::should_stop(double t, double delta_e) const { return pbgfm::should_stop(t, delta_e, state_, cfg_); }

void write_trace_header(std::ostream& out) { out << "step,t,dt,e_n,F,E_sol,dE\n"; }

void write_trace_row(std::ostream& out, std::size_t step, double t, double dt, double e_n, double factor,
                     double energy, double delta_e) {
  const auto old = out.precision(17);
  out << step << ',' << t << ',' << dt << ',' << e_n << ',' << factor << ',' << energy << ',' << delta_e << '\n';
  out.precision(old);
}

}  // namespace pbgfm
