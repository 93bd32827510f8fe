#include "pbgfm/stepping.hpp"

#include <cmath>

#include "pbgfm/error.hpp"

namespace pbgfm {

double nonlinear_substep(double w0, double kappa_sq, double dt, double strength) {
  const double rate = strength * kappa_sq * dt;
  if (w0 == 0.0 || rate == 0.0) return w0;
  // w+ = 2 artanh(tanh(w0/2) e^{-rate}), written so that neither large |w0| nor small rate loses digits.
  const double a = std::abs(w0);
  const double ea = std::exp(-a);
  const double decay = std::exp(-rate);
  const double y = decay * (1.0 - ea) / (1.0 + ea);
  const double one_minus_y = -std::expm1(-rate) + decay * 2.0 * ea / (1.0 + ea);
  const double mag = y < 0.5 ? std::log1p(y) - std::log1p(-y) : std::log1p(y) - std::log(one_minus_y);
  return std::copysign(mag, w0);
}

double linear_substep(double w0, double kappa_sq, double dt, double strength) {
  return w0 * std::exp(-strength * kappa_sq * dt);
}

void reaction_substep(Field& w, const Field& kappa_sq, double dt, double strength, Reaction reaction) {
  const Grid& g = w.grid();
  const auto& n = g.dims();
  double* v = w.values().data();
  const double* k2 = kappa_sq.values().data();
  for (std::size_t k = 1; k + 1 < n[2]; ++k)
    for (std::size_t j = 1; j + 1 < n[1]; ++j) {
      const std::size_t row = g.index(0, j, k);
      for (std::size_t i = 1; i + 1 < n[0]; ++i) {
        const std::size_t m = row + i;
        if (k2[m] == 0.0) continue;
        v[m] = reaction == Reaction::Sinh ? nonlinear_substep(v[m], k2[m], dt, strength)
                                          : linear_substep(v[m], k2[m], dt, strength);
      }
    }
}

SplitStepper::SplitStepper(const InterfaceOperator& op, const Field& kappa_sq, Scheme scheme, Reaction reaction)
    : op_(&op),
      kappa_sq_(&kappa_sq),
      scheme_(scheme),
      reaction_(reaction),
      a1_(op.grid()),
      a2_(op.grid()),
      cp_(op.grid()) {
  if (!(kappa_sq.grid() == op.grid())) throw ValidationError("kappa^2 field is on a different grid");
}

void SplitStepper::step(Field& u, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  if (!(u.grid() == op_->grid())) throw ValidationError("field is on a different grid");
  if (scheme_ == Scheme::ADI)
    adi(u, dt);
  else
    lod(u, dt);
}

void SplitStepper::implicit_sweep(Axis axis, double tau, Field& x) {
  const Grid& g = op_->grid();
  const auto& n = g.dims();
  const double* w = op_->weights(axis).data();
  double* xv = x.values().data();
  double* cp = cp_.values().data();
  const std::size_t nx = n[0], nxy = n[0] * n[1];
  switch (axis) {
    case Axis::X:
#pragma omp parallel for schedule(static)
      for (std::size_t k = 1; k < n[2] - 1; ++k)
        for (std::size_t j = 1; j + 1 < n[1]; ++j) {
          const std::size_t base = g.index(0, j, k);
          solve_shifted_lines(w + base, xv + base, cp + base, 1, nx, 1, tau);
        }
      break;
    case Axis::Y:
#pragma omp parallel for schedule(static)
      for (std::size_t k = 1; k < n[2] - 1; ++k) {
        const std::size_t base = g.index(1, 0, k);
        solve_shifted_lines(w + base, xv + base, cp + base, nx, n[1], nx - 2, tau);
      }
      break;
    case Axis::Z:
#pragma omp parallel for schedule(static)
      for (std::size_t j = 1; j < n[1] - 1; ++j) {
        const std::size_t base = g.index(1, j, 0);
        solve_shifted_lines(w + base, xv + base, cp + base, nxy, n[2], nx - 2, tau);
      }
      break;
  }
}

namespace {

template <class Fn>
void for_interior(const Grid& g, Fn&& fn) {
  const auto& n = g.dims();
  for (std::size_t k = 1; k + 1 < n[2]; ++k)
    for (std::size_t j = 1; j + 1 < n[1]; ++j) {
      const std::size_t row = g.index(0, j, k);
      for (std::size_t i = 1; i + 1 < n[0]; ++i) fn(row + i);
    }
}

}  // namespace

// Douglas splitting:
//   (I - dt Dx) v*  = [I + dt (Dy + Dz)] v
//   (I - dt Dy) v** = v*  - dt Dy v
//   (I - dt Dz) u   = v** - dt Dz v
// with every D carrying its jump correction; in the last two stages the corrections cancel.
void SplitStepper::adi(Field& u, double dt) {
  reaction_substep(u, *kappa_sq_, dt, 1.0, reaction_);
  const Grid& g = op_->grid();
  op_->apply(Axis::Y, u, a1_, false);
  op_->apply(Axis::Z, u, a2_, false);
  double* v = u.values().data();
  const double* ay = a1_.values().data();
  const double* az = a2_.values().data();
  const double* cx = op_->corrections(Axis::X).data();
  const double* cy = op_->corrections(Axis::Y).data();
  const double* cz = op_->corrections(Axis::Z).data();
  for_interior(g, [&](std::size_t m) { v[m] += dt * (ay[m] + az[m] + cx[m] + cy[m] + cz[m]); });
  implicit_sweep(Axis::X, dt, u);
  for_interior(g, [&](std::size_t m) { v[m] -= dt * ay[m]; });
  implicit_sweep(Axis::Y, dt, u);
  for_interior(g, [&](std::size_t m) { v[m] -= dt * az[m]; });
  implicit_sweep(Axis::Z, dt, u);
}

// Half reaction, Crank-Nicolson in x, y, z, half reaction.
void SplitStepper::lod(Field& u, double dt) {
  reaction_substep(u, *kappa_sq_, dt, 0.5, reaction_);
  const Grid& g = op_->grid();
  const double tau = 0.5 * dt;
  double* v = u.values().data();
  const double* a = a1_.values().data();
  for (Axis axis : kAxes) {
    op_->apply(axis, u, a1_, false);
    const double* c = op_->corrections(axis).data();
    for_interior(g, [&](std::size_t m) { v[m] += tau * a[m] + dt * c[m]; });
    implicit_sweep(axis, tau, u);
  }
  reaction_substep(u, *kappa_sq_, dt, 0.5, reaction_);
}

Field adi_step(const Field& u, double dt, const InterfaceOperator& op, const Field& kappa_sq) {
  Field out = u;
  SplitStepper(op, kappa_sq, Scheme::ADI).step(out, dt);
  return out;
}

Field lod_step(const Field& u, double dt, const InterfaceOperator& op, const Field& kappa_sq) {
  Field out = u;
  SplitStepper(op, kappa_sq, Scheme::LOD).step(out, dt);
  return out;
}

}  // namespace pbgfm
