#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pbgfm/atoms.hpp"
#include "pbgfm/electrostatics.hpp"
#include "pbgfm/grid.hpp"
#include "pbgfm/surface.hpp"

namespace pbgfm {

/// Jumps across the interface at one crossing: a = [u], b = [eps du/dxi] along the crossing's axis.
/// [f] is the solvent-side value minus the solute-side value.
struct JumpData {
  double a = 0.0;
  double b = 0.0;
};

/// A crossing on the edge between line nodes `edge` and `edge + 1`.
struct LineCrossing {
  std::size_t edge = 0;
  double theta = 0.5;
  JumpData jump;
};

/// Spatial operator on one grid line of `n` nodes, of which nodes 0 and n-1 are Dirichlet.
/// Acting on interior values v it gives A v + c, with A symmetric tridiagonal:
/// A(m,m) = -(w[m-1] + w[m]) and A(m,m+1) = w[m] in full-line node numbering.
struct LineSystem {
  std::vector<double> w;     ///< n-1 edge weights, all >= 0
  std::vector<double> corr;  ///< n-2 jump corrections, one per interior node
  double bc_lo = 0.0;
  double bc_hi = 0.0;

  std::size_t interior() const noexcept { return corr.size(); }
  /// Entries of A over interior nodes, indexed 0..interior()-1.
  double diag(std::size_t m) const noexcept { return -(w[m] + w[m + 1]); }
  double off(std::size_t m) const noexcept { return w[m + 1]; }

  /// Throws ValidationError unless every weight is finite and nonnegative and sizes agree.
  void check_invariants() const;
};

/// Assembles one line. `inside` has one flag per line node; crossings must sit exactly on
/// the edges whose flags differ.
LineSystem assemble_line(std::span<const std::uint8_t> inside, double eps_in, double eps_out, double h,
                         std::span<const LineCrossing> crossings, double bc_lo, double bc_hi);

/// Solves (I - tau A) x = rhs over interior nodes; Dirichlet values and corrections are not added.
std::vector<double> thomas_solve(const LineSystem& sys, double tau, std::span<const double> rhs);

/// A v + c with the Dirichlet values folded into the first and last rows.
std::vector<double> apply_operator(const LineSystem& sys, std::span<const double> v);

/// Batched solve of (I - tau A) x = rhs on `batch` lines whose nodes sit at offsets m*stride + b.
/// Edge m of line b has weight w[m*stride + b]. On entry x holds the right-hand side at interior
/// nodes and the Dirichlet values at m = 0 and m = len-1; on exit the interior holds the solution.
/// `cp` is scratch with the same layout.
void solve_shifted_lines(const double* w, double* x, double* cp, std::size_t stride, std::size_t len,
                         std::size_t batch, double tau) noexcept;

/// GFM-modified second differences on a whole grid. For each axis, w[n] weights the edge from
/// node n to n + stride and corr[n] holds the jump correction of node n.
class InterfaceOperator {
 public:
  InterfaceOperator(const InterfaceData& interface, const AtomSet& atoms, const PhysicalParams& params);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> weights(Axis a) const noexcept { return w_[to_int(a)]; }
  std::span<const double> corrections(Axis a) const noexcept { return corr_[to_int(a)]; }

  /// out = A_axis v (+ c_axis) at interior nodes, 0 on the boundary.
  void apply(Axis a, const Field& v, Field& out, bool with_correction) const;

  /// LineSystem of the line through `start` (whose axis coordinate must be 0), with Dirichlet values from `u`.
  LineSystem line(Axis a, const Index3& start, const Field& u) const;

  /// Calls fn(axis, start, system) for every line that contains interior nodes.
  void for_each_line(const Field& u, const std::function<void(Axis, const Index3&, const LineSystem&)>& fn) const;

 private:
  Grid grid_;
  std::array<std::vector<double>, 3> w_;
  std::array<std::vector<double>, 3> corr_;
};

/// Jump data at a crossing from the Coulomb component: a = G, b = eps_in * dG/dxi.
JumpData jump_at(const Crossing& c, const AtomSet& atoms, const PhysicalParams& params);

}  // namespace pbgfm
