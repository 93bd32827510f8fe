#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "pbgfm/grid.hpp"

namespace pbgfm {

enum class ControllerKind { Constant, Manual1, Manual2, PID1, PID2, FastPID, NonincreasingPID };

std::string_view controller_name(ControllerKind kind);
/// Accepts constant, manual1, manual2, pid1, pid2, fastpid, nipid (and nonincreasingpid).
std::optional<ControllerKind> parse_controller(std::string_view name);

enum class ErrorKind { U, E };

struct ControllerConfig {
  ControllerKind kind = ControllerKind::NonincreasingPID;
  double dt = 0.01;  ///< step of the Constant controller
  double dt_max = 1.0;
  double dt_min = 0.01;
  double k_p = 0.075;
  double k_i = 0.175;
  double k_d = 0.01;
  double eps_p = 0.0025;
  double f_lo = 0.2;
  double f_hi = 5.0;
  double tol = 0.01;
  double t_end = 50.0;
  double t_min_stop = 5.0;
  std::size_t post_min_steps = 100;

  /// Defaults for a kind: TOL is 0.01 for NonincreasingPID and 1e-4 otherwise.
  static ControllerConfig defaults(ControllerKind kind);
  void validate() const;
};

/// Error norm the controller reads: relative field change for PID1, FastPID and NonincreasingPID,
/// relative energy change for PID2, absolute field change for Manual1, energy difference for Manual2.
ErrorKind pid_error_kind(ControllerKind kind);

struct ControllerState {
  double e_n = 0.0;
  double e_n1 = 0.0;
  double e_n2 = 0.0;
  std::size_t history = 0;  ///< number of errors recorded so far
  double delta = 1.0;       ///< manual threshold
  double dt = 0.0;
  bool reached_min = false;
  std::size_t steps_since_min = 0;
};

/// ||un - uprev||_2 / ||un||_2 for U, |(En - Eprev) / En| for E.
/// Returns a negative value when the denominator vanishes.
double error_norm(ErrorKind kind, const Field& un, const Field& uprev, double en, double eprev);

/// Scaling factor from the error history, clamped to [f_lo, f_hi]; 1 until three errors are known.
/// Nonpositive history entries are replaced by eps_p.
double pid_factor(const ControllerState& state, const ControllerConfig& cfg);

/// Halving rule of the manual controllers: when e < delta both dt and delta halve (dt floored at dt_min).
void manual_update(ControllerState& state, const ControllerConfig& cfg, double e);

bool should_stop(double t, double delta_e, const ControllerState& state, const ControllerConfig& cfg);

/// Times within this relative distance are treated as equal.
bool time_reached(double t, double target);

/// Step-size controller: initial_dt() then, after each step, update() with the new error data.
class Controller {
 public:
  explicit Controller(const ControllerConfig& cfg);

  const ControllerConfig& config() const noexcept { return cfg_; }
  const ControllerState& state() const noexcept { return state_; }
  double dt() const noexcept { return state_.dt; }
  /// Factor applied by the last update (1 for non-PID kinds).
  double last_factor() const noexcept { return last_factor_; }
  /// Error value fed to the last update.
  double last_error() const noexcept { return last_error_; }

  /// Records the step just taken. `rel_u` and `rel_e` are the relative norms (negative when undefined),
  /// `abs_u` = ||un - uprev||_2 and `delta_e` = |En - Eprev|.
  void update(double rel_u, double rel_e, double abs_u, double delta_e);

  bool should_stop(double t, double delta_e) const;

 private:
  ControllerConfig cfg_;
  ControllerState state_;
  double last_factor_ = 1.0;
  double last_error_ = 0.0;
};

/// Header line of the controller trace CSV.
void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, std::size_t step, double t, double dt, double e_n, double factor,
                     double energy, double delta_e);

}  // namespace pbgfm
