#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pbgfm/atoms.hpp"
#include "pbgfm/grid.hpp"

namespace pbgfm {

/// Interface fractions are kept away from 0 and 1 so GFM edge coefficients stay bounded.
inline constexpr double kThetaMin = 1e-6;
inline constexpr double kThetaMax = 1.0 - 1e-6;
/// Nodes within this distance of the surface are classified as solute.
inline constexpr double kOnSurfaceTol = 1e-12;
inline constexpr double kDefaultProbeRadius = 1.4;

/// Intersection of the molecular surface with the grid edge from `low` to `low + e_axis`.
struct Crossing {
  Axis axis = Axis::X;
  Index3 low;
  double theta = 0.5;  ///< fraction of h from `low` to the surface
  Vec3 location;

  friend bool operator==(const Crossing&, const Crossing&) = default;
};

/// Builds a crossing with theta clamped to [kThetaMin, kThetaMax] and its location
/// computed from the clamped fraction.
Crossing make_crossing(const Grid& grid, Axis axis, const Index3& low, double theta);

/// Eulerian interface: per-node solute flag plus one crossing per sign-change edge.
/// The constructor enforces that invariant and throws ValidationError otherwise.
class InterfaceData {
 public:
  InterfaceData(const Grid& grid, std::vector<std::uint8_t> inside, std::array<std::vector<Crossing>, 3> crossings);

  const Grid& grid() const noexcept { return grid_; }
  bool inside(std::size_t n) const noexcept { return inside_[n] != 0; }
  bool inside(const Index3& p) const noexcept { return inside_[grid_.index(p)] != 0; }
  std::span<const std::uint8_t> inside_mask() const noexcept { return inside_; }
  std::size_t inside_count() const noexcept;

  std::span<const Crossing> crossings(Axis a) const noexcept { return crossings_[to_int(a)]; }
  std::size_t crossing_count() const noexcept;
  /// Crossing on the edge leaving node `low_index` along `a`, or nullptr.
  const Crossing* find_crossing(Axis a, std::size_t low_index) const noexcept;

  /// True when no node on the outer faces of the grid is solute.
  bool boundary_is_solvent() const noexcept;

  friend bool operator==(const InterfaceData&, const InterfaceData&) = default;

 private:
  Grid grid_;
  std::vector<std::uint8_t> inside_;
  std::array<std::vector<Crossing>, 3> crossings_;
};

/// Exact sphere: inside iff |node - center| < R (ties to inside), crossings from the quadratic root.
InterfaceData classify_sphere(const Grid& grid, const Vec3& center, double radius);

/// Union of atom spheres with radii r_i + inflate (van der Waals at 0, solvent-accessible at r_p).
InterfaceData classify_union(const Grid& grid, const AtomSet& atoms, double inflate);

struct SesOptions {
  /// Crossings by bisection on the continuous distance (true) or by the linear root of
  /// nodal implicit values (false).
  bool refine = true;
};

/// Solvent-excluded surface on the grid: the van der Waals union closed by a probe ball
/// of radius r_p. A point is solvent-excluded when no probe center outside the
/// solvent-accessible union lies within r_p of it.
InterfaceData classify_ses_grid(const Grid& grid, const AtomSet& atoms, double probe_radius,
                                const SesOptions& options = {});

/// Euclidean distance (Angstrom) from every node to the nearest node with seed != 0;
/// +inf when there are no seeds.
std::vector<double> distance_transform(const Grid& grid, std::span<const std::uint8_t> seed);

/// Continuous distance from p to the region outside every sphere (c_i, r_i + r_p),
/// capped at `cap`; 0 when p is already outside.
double distance_to_accessible(const AtomSet& atoms, double probe_radius, const Vec3& p, double cap);

enum class SignConvention { Native, Eses };

/// Text interchange format; the grammar is documented in docs/interface-format.md.
void export_interface(std::ostream& out, const InterfaceData& data,
                      SignConvention convention = SignConvention::Native);
std::string export_interface(const InterfaceData& data, SignConvention convention = SignConvention::Native);
InterfaceData import_interface(std::istream& in);
InterfaceData import_interface(const std::string& text);

}  // namespace pbgfm
