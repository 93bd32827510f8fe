#include "pbgfm/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "interface_builder.hpp"
#include "pbgfm/error.hpp"

namespace pbgfm {

Crossing make_crossing(const Grid& grid, Axis axis, const Index3& low, double theta) {
  if (!std::isfinite(theta)) throw NumericalError("non-finite interface fraction");
  Crossing c;
  c.axis = axis;
  c.low = low;
  c.theta = std::clamp(theta, kThetaMin, kThetaMax);
  c.location = grid.node(low);
  c.location[to_int(axis)] += c.theta * grid.spacing();
  return c;
}

InterfaceData::InterfaceData(const Grid& grid, std::vector<std::uint8_t> inside,
                             std::array<std::vector<Crossing>, 3> crossings)
    : grid_(grid), inside_(std::move(inside)), crossings_(std::move(crossings)) {
  if (inside_.size() != grid_.size()) throw ValidationError("inside mask length does not match grid");
  for (auto& v : inside_) v = v ? 1 : 0;

  const auto& n = grid_.dims();
  for (Axis axis : kAxes) {
    const int a = to_int(axis);
    const std::size_t s = grid_.stride(axis);
    auto& list = crossings_[a];
    std::sort(list.begin(), list.end(),
              [&](const Crossing& l, const Crossing& r) { return grid_.index(l.low) < grid_.index(r.low); });
    for (std::size_t c = 0; c < list.size(); ++c) {
      const Crossing& x = list[c];
      if (x.axis != axis) throw ValidationError("crossing stored under the wrong axis");
      if (x.low.i >= n[0] || x.low.j >= n[1] || x.low.k >= n[2] || x.low[a] + 1 >= n[a])
        throw ValidationError("crossing edge lies outside the grid");
      if (!(x.theta >= kThetaMin && x.theta <= kThetaMax))
        throw ValidationError("crossing fraction outside the clamp range");
      const std::size_t idx = grid_.index(x.low);
      if (inside_[idx] == inside_[idx + s])
        throw ValidationError(std::string("crossing on a same-side ") + axis_name(axis) + " edge");
      if (c > 0 && grid_.index(list[c - 1].low) == idx)
        throw ValidationError("two crossings on one edge");
    }
    std::size_t sign_changes = 0;
    for (std::size_t k = 0; k < n[2]; ++k)
      for (std::size_t j = 0; j < n[1]; ++j)
        for (std::size_t i = 0; i < n[0]; ++i) {
          const Index3 p{i, j, k};
          if (p[a] + 1 >= n[a]) continue;
          const std::size_t idx = grid_.index(p);
          if (inside_[idx] != inside_[idx + s]) ++sign_changes;
        }
    if (sign_changes != list.size())
      throw ValidationError(std::string("missing crossing on a sign-change ") + axis_name(axis) + " edge");
  }
}

std::size_t InterfaceData::inside_count() const noexcept {
  return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), std::uint8_t{1}));
}

std::size_t InterfaceData::crossing_count() const noexcept {
  return crossings_[0].size() + crossings_[1].size() + crossings_[2].size();
}

const Crossing* InterfaceData::find_crossing(Axis a, std::size_t low_index) const noexcept {
  const auto& list = crossings_[to_int(a)];
  auto it = std::lower_bound(list.begin(), list.end(), low_index,
                             [&](const Crossing& c, std::size_t v) { return grid_.index(c.low) < v; });
  if (it == list.end() || grid_.index(it->low) != low_index) return nullptr;
  return &*it;
}

bool InterfaceData::boundary_is_solvent() const noexcept {
  for (std::size_t n = 0; n < inside_.size(); ++n)
    if (inside_[n] && grid_.is_boundary(n)) return false;
  return true;
}

namespace {

struct Sphere {
  Vec3 center;
  double radius;
};

void require_inside_box(const Grid& grid, const Sphere& s) {
  const Vec3 lo = grid.origin();
  const Vec3 hi = grid.upper();
  for (int d = 0; d < 3; ++d)
    if (!(s.center[d] - s.radius > lo[d] && s.center[d] + s.radius < hi[d]))
      throw ValidationError("sphere touches or crosses the grid boundary");
}

// Signed distance to the union surface; negative inside.
double union_level(std::span<const Sphere> spheres, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const Sphere& s : spheres) best = std::min(best, distance(p, s.center) - s.radius);
  return best;
}

// Exact exit/entry fraction of the union boundary on the edge starting at `p0`, found by
// merging per-sphere chord intervals. `low_inside` selects which end is solute.
double union_edge_root(std::span<const Sphere> spheres, const Vec3& p0, int axis, double h, bool low_inside) {
  struct Interval {
    double lo, hi;
  };
  std::vector<Interval> chords;
  for (const Sphere& s : spheres) {
    const Vec3 d = p0 - s.center;
    const double b = d[axis] / h;
    const double c = (norm2(d) - s.radius * s.radius) / (h * h);
    const double disc = b * b - c;
    if (disc < 0.0) continue;
    const double r = std::sqrt(disc);
    const double lo = -b - r, hi = -b + r;
    if (hi < -1e-9 || lo > 1.0 + 1e-9) continue;
    chords.push_back({lo, hi});
  }
  std::sort(chords.begin(), chords.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& c : chords) {
    if (!merged.empty() && c.lo <= merged.back().hi + 1e-12)
      merged.back().hi = std::max(merged.back().hi, c.hi);
    else
      merged.push_back(c);
  }
  const double tol = 1e-9;
  for (const Interval& m : merged) {
    if (low_inside && m.lo <= tol && m.hi >= -tol) return m.hi;
    if (!low_inside && m.lo <= 1.0 + tol && m.hi >= 1.0 - tol) return m.lo;
  }
  // Tie-classified endpoints can miss every chord; fall back to bisection on the level set.
  double a = 0.0, b = 1.0;
  for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
    const double mid = 0.5 * (a + b);
    Vec3 pm = p0;
    pm[axis] += mid * h;
    const bool in = union_level(spheres, pm) < kOnSurfaceTol;
    if (in == low_inside)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

InterfaceData classify_spheres(const Grid& grid, std::span<const Sphere> spheres) {
  for (const Sphere& s : spheres) require_inside_box(grid, s);
  std::vector<std::uint8_t> inside(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n)
    inside[n] = union_level(spheres, grid.node(grid.unravel(n))) < kOnSurfaceTol ? 1 : 0;
  auto root = [&](Axis axis, const Index3& low, bool low_inside) {
    return union_edge_root(spheres, grid.node(low), to_int(axis), grid.spacing(), low_inside);
  };
  return detail::build_interface(grid, std::move(inside), root);
}

}  // namespace

InterfaceData classify_sphere(const Grid& grid, const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw ValidationError("sphere radius must be positive");
  const Sphere s{center, radius};
  return classify_spheres(grid, std::span<const Sphere>(&s, 1));
}

InterfaceData classify_union(const Grid& grid, const AtomSet& atoms, double inflate) {
  if (!(inflate >= 0.0)) throw ValidationError("inflation radius must be nonnegative");
  std::vector<Sphere> spheres;
  spheres.reserve(atoms.size());
  for (const Atom& a : atoms) spheres.push_back({a.center, a.radius + inflate});
  return classify_spheres(grid, spheres);
}

}  // namespace pbgfm
