#include "pbgfm/electrostatics.hpp"

#include <cmath>
#include <string>

#include "pbgfm/error.hpp"

namespace pbgfm {

PhysicalParams PhysicalParams::with_ionic_strength(double eps_in, double eps_out, double ionic_strength) {
  PhysicalParams p;
  p.eps_in = eps_in;
  p.eps_out = eps_out;
  p.ionic_strength = ionic_strength;
  p.kappa_sq = debye_kappa_sq(ionic_strength);
  p.validate();
  return p;
}

PhysicalParams PhysicalParams::with_kappa_sq(double eps_in, double eps_out, double kappa_sq) {
  PhysicalParams p;
  p.eps_in = eps_in;
  p.eps_out = eps_out;
  p.kappa_sq = kappa_sq;
  p.ionic_strength = kappa_sq / kDebyeFactor;
  p.validate();
  return p;
}

void PhysicalParams::validate() const {
  if (!(eps_in > 0.0)) throw ValidationError("eps_in must be positive");
  if (!(eps_out >= eps_in)) throw ValidationError("eps_out must be >= eps_in");
  if (!(kappa_sq >= 0.0) || !std::isfinite(kappa_sq)) throw ValidationError("kappa^2 must be >= 0");
  if (!(charge_factor > 0.0)) throw ValidationError("charge factor must be positive");
  if (!(kbt_kcal > 0.0)) throw ValidationError("kBT must be positive");
}

double debye_kappa_sq(double ionic_strength) {
  if (!(ionic_strength >= 0.0)) throw ValidationError("ionic strength must be nonnegative");
  return kDebyeFactor * ionic_strength;
}

namespace {

double guarded_distance(const Vec3& p, const Atom& a) {
  const double r = distance(p, a.center);
  if (r <= kSingularityGuard) throw SingularityError("evaluation point coincides with an atom center");
  return r;
}

}  // namespace

double green_potential(const AtomSet& atoms, const Vec3& p, const PhysicalParams& params) {
  double sum = 0.0;
  for (const Atom& a : atoms) sum += a.charge / guarded_distance(p, a);
  return params.charge_factor * sum / params.eps_in;
}

Vec3 green_gradient(const AtomSet& atoms, const Vec3& p, const PhysicalParams& params) {
  Vec3 g;
  for (const Atom& a : atoms) {
    const double r = guarded_distance(p, a);
    g += (p - a.center) * (-a.charge / (r * r * r));
  }
  return g * (params.charge_factor / params.eps_in);
}

double dirichlet_boundary(const AtomSet& atoms, const Vec3& p, const PhysicalParams& params) {
  const double kappa_bar = std::sqrt(params.kappa_sq / params.eps_out);
  double sum = 0.0;
  for (const Atom& a : atoms) {
    const double r = guarded_distance(p, a);
    sum += a.charge * std::exp(-r * kappa_bar) / r;
  }
  return params.charge_factor * sum / params.eps_out;
}

double solvation_energy(const Field& u, const AtomSet& atoms, const PhysicalParams& params) {
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    if (!u.grid().contains(a.center))
      throw DomainError("atom " + std::to_string(i) + " center lies outside the grid");
    sum += a.charge * trilinear(u, a.center);
  }
  return 0.5 * params.kbt_kcal * sum;
}

}  // namespace pbgfm
