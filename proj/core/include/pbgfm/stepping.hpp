#pragma once

#include <vector>

#include "pbgfm/gfm.hpp"
#include "pbgfm/grid.hpp"

namespace pbgfm {

enum class Scheme { ADI, LOD };

/// Reaction term integrated exactly between linear sweeps: -kappa^2 sinh(u), or -kappa^2 u
/// for the linearized equation.
enum class Reaction { Sinh, Linear };

/// Exact flow of dw/dt = -s kappa^2 sinh(w) over dt.
double nonlinear_substep(double w0, double kappa_sq, double dt, double strength);
/// Exact flow of dw/dt = -s kappa^2 w over dt.
double linear_substep(double w0, double kappa_sq, double dt, double strength);

/// Applies the reaction flow to every interior node of w; boundary nodes are left untouched.
void reaction_substep(Field& w, const Field& kappa_sq, double dt, double strength, Reaction reaction = Reaction::Sinh);

/// One pseudo-time step of the split scheme, reusing scratch storage between calls.
/// Boundary nodes of u carry the Dirichlet data and are never modified.
class SplitStepper {
 public:
  SplitStepper(const InterfaceOperator& op, const Field& kappa_sq, Scheme scheme, Reaction reaction = Reaction::Sinh);

  void step(Field& u, double dt);

  Scheme scheme() const noexcept { return scheme_; }

 private:
  void adi(Field& u, double dt);
  void lod(Field& u, double dt);
  /// Solves (I - tau A_axis) x = rhs in place; x carries rhs in the interior and Dirichlet data on the boundary.
  void implicit_sweep(Axis axis, double tau, Field& x);

  const InterfaceOperator* op_;
  const Field* kappa_sq_;
  Scheme scheme_;
  Reaction reaction_;
  Field a1_, a2_, cp_;
};

Field adi_step(const Field& u, double dt, const InterfaceOperator& op, const Field& kappa_sq);
Field lod_step(const Field& u, double dt, const InterfaceOperator& op, const Field& kappa_sq);

}  // namespace pbgfm
