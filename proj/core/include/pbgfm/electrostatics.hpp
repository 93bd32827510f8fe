#pragma once

#include "pbgfm/atoms.hpp"
#include "pbgfm/grid.hpp"
#include "pbgfm/vec3.hpp"

namespace pbgfm {

/// kB*T in kcal/mol at 298.15 K.
inline constexpr double kDefaultKbtKcal = 0.592183;
/// Coulomb constant in kcal*Angstrom/(mol*e^2).
inline constexpr double kCoulombKcal = 332.0716;
/// Debye-Hueckel factor: kappa^2 [1/A^2] per unit ionic strength [M].
inline constexpr double kDebyeFactor = 8.486902807;
/// Distance below which a point is considered to coincide with a point charge.
inline constexpr double kSingularityGuard = 1e-12;

/// Material and unit constants. Potentials are carried in units of kB*T/e,
/// so `charge_factor` (e^2/(kB*T), in Angstrom) multiplies every Coulomb sum.
struct PhysicalParams {
  double eps_in = 1.0;
  double eps_out = 80.0;
  double ionic_strength = 0.0;
  double kappa_sq = 0.0;
  double charge_factor = kCoulombKcal / kDefaultKbtKcal;
  double kbt_kcal = kDefaultKbtKcal;

  /// Sets ionic_strength and derives kappa_sq from it.
  static PhysicalParams with_ionic_strength(double eps_in, double eps_out, double ionic_strength);
  /// Sets kappa_sq directly; ionic_strength is back-computed for reporting.
  static PhysicalParams with_kappa_sq(double eps_in, double eps_out, double kappa_sq);

  void validate() const;
};

/// kappa^2 = 8.486902807 * I_s.
double debye_kappa_sq(double ionic_strength);

/// Singular Coulomb component G(p) = C * sum q_i / (eps_in |p - r_i|).
double green_potential(const AtomSet& atoms, const Vec3& p, const PhysicalParams& params);

/// Analytic gradient of green_potential.
Vec3 green_gradient(const AtomSet& atoms, const Vec3& p, const PhysicalParams& params);

/// Screened-Coulomb Dirichlet data C * sum q_i exp(-|p-r_i| sqrt(kappa^2/eps_out)) / (eps_out |p-r_i|).
double dirichlet_boundary(const AtomSet& atoms, const Vec3& p, const PhysicalParams& params);

/// Solvation energy in kcal/mol: 0.5 * kBT * sum q_i u(r_i), with u the reaction field
/// trilinearly interpolated at each atom center.
double solvation_energy(const Field& u, const AtomSet& atoms, const PhysicalParams& params);

}  // namespace pbgfm
