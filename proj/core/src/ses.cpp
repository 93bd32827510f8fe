#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "interface_builder.hpp"
#include "pbgfm/error.hpp"
#include "pbgfm/surface.hpp"

namespace pbgfm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), squared distances in cell units.
// Entries equal to +inf never enter the envelope.
void squared_distance_1d(std::span<const double> f, std::span<double> d, std::vector<std::size_t>& v,
                         std::vector<double>& z) {
  const std::size_t n = f.size();
  v.resize(n);
  z.resize(n + 1);
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (!any) {
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      any = true;
      continue;
    }
    const double fq = f[q] + static_cast<double>(q * q);
    double s;
    while (true) {
      const double vk = static_cast<double>(v[k]);
      s = (fq - (f[v[k]] + vk * vk)) / (2.0 * static_cast<double>(q) - 2.0 * vk);
      if (s <= z[k] && k > 0)
        --k;
      else
        break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (!any) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double diff = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = diff * diff + f[v[k]];
  }
}

struct Ball {
  Vec3 center;
  double radius;
};

bool exposed(const Vec3& q, std::span<const Ball> balls, std::size_t skip_a, std::size_t skip_b,
             std::size_t skip_c) {
  for (std::size_t m = 0; m < balls.size(); ++m) {
    if (m == skip_a || m == skip_b || m == skip_c) continue;
    const double r = balls[m].radius;
    if (norm2(q - balls[m].center) < r * r * (1.0 - 1e-12)) return false;
  }
  return true;
}

Vec3 any_perpendicular(const Vec3& n) {
  const Vec3 trial = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 u = cross(n, trial);
  return u * (1.0 / norm(u));
}

struct Circle {
  Vec3 center;
  Vec3 normal;
  double radius;
};

bool intersect(const Ball& a, const Ball& b, Circle& out) {
  const Vec3 d = b.center - a.center;
  const double dist = norm(d);
  if (dist <= 0.0 || dist >= a.radius + b.radius || dist <= std::abs(a.radius - b.radius)) return false;
  const Vec3 n = d * (1.0 / dist);
  const double along = (dist * dist + a.radius * a.radius - b.radius * b.radius) / (2.0 * dist);
  const double rho2 = a.radius * a.radius - along * along;
  if (rho2 <= 0.0) return false;
  out = {a.center + n * along, n, std::sqrt(rho2)};
  return true;
}

}  // namespace

std::vector<double> distance_transform(const Grid& grid, std::span<const std::uint8_t> seed) {
  if (seed.size() != grid.size()) throw ValidationError("seed mask length does not match grid");
  std::vector<double> d2(grid.size());
  for (std::size_t n = 0; n < d2.size(); ++n) d2[n] = seed[n] ? 0.0 : kInf;

  const auto& dims = grid.dims();
  std::vector<double> line_in, line_out;
  std::vector<std::size_t> v;
  std::vector<double> z;
  for (Axis axis : kAxes) {
    const int a = to_int(axis);
    const std::size_t len = dims[a];
    const std::size_t s = grid.stride(axis);
    line_in.resize(len);
    line_out.resize(len);
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (std::size_t ic = 0; ic < dims[c]; ++ic)
      for (std::size_t ib = 0; ib < dims[b]; ++ib) {
        Index3 start;
        start[a] = 0;
        start[b] = ib;
        start[c] = ic;
        const std::size_t base = grid.index(start);
        for (std::size_t m = 0; m < len; ++m) line_in[m] = d2[base + m * s];
        squared_distance_1d(line_in, line_out, v, z);
        for (std::size_t m = 0; m < len; ++m) d2[base + m * s] = line_out[m];
      }
  }
  const double h = grid.spacing();
  for (double& x : d2) x = std::sqrt(x) * h;
  return d2;
}

double distance_to_accessible(const AtomSet& atoms, double probe_radius, const Vec3& p, double cap) {
  std::vector<Ball> local;
  bool covered = false;
  for (const Atom& a : atoms) {
    const Ball b{a.center, a.radius + probe_radius};
    const double dist = distance(p, b.center);
    if (dist < b.radius + cap) local.push_back(b);
    if (dist < b.radius) covered = true;
  }
  if (!covered) return 0.0;

  // The nearest boundary point of a union of balls is a radial projection onto one sphere,
  // the nearest point of a pairwise intersection circle, or a triple intersection point.
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  double best = cap;
  const std::size_t m = local.size();
  for (std::size_t i = 0; i < m; ++i) {
    Vec3 dir = p - local[i].center;
    const double len = norm(dir);
    dir = len > 1e-14 ? dir * (1.0 / len) : Vec3{1, 0, 0};
    const Vec3 q = local[i].center + dir * local[i].radius;
    const double d = distance(p, q);
    if (d < best && exposed(q, local, i, none, none)) best = d;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      Circle circ;
      if (!intersect(local[i], local[j], circ)) continue;
      const Vec3 w = p - circ.center;
      Vec3 radial = w - circ.normal * dot(w, circ.normal);
      const double len = norm(radial);
      radial = len > 1e-14 ? radial * (1.0 / len) : any_perpendicular(circ.normal);
      const Vec3 q = circ.center + radial * circ.radius;
      const double d = distance(p, q);
      if (d < best && exposed(q, local, i, j, none)) best = d;

      const Vec3 u = any_perpendicular(circ.normal);
      const Vec3 v = cross(circ.normal, u);
      for (std::size_t k = j + 1; k < m; ++k) {
        const Vec3 wk = local[k].center - circ.center;
        const double A = dot(u, wk), B = dot(v, wk);
        const double M = std::sqrt(A * A + B * B);
        if (M < 1e-14) continue;
        const double D = (norm2(wk) + circ.radius * circ.radius - local[k].radius * local[k].radius) /
                         (2.0 * circ.radius);
        if (std::abs(D) > M) continue;
        const double phi0 = std::atan2(B, A);
        const double delta = std::acos(std::clamp(D / M, -1.0, 1.0));
        for (double phi : {phi0 + delta, phi0 - delta}) {
          const Vec3 vertex = circ.center + (u * std::cos(phi) + v * std::sin(phi)) * circ.radius;
          const double dv = distance(p, vertex);
          if (dv < best && exposed(vertex, local, i, j, k)) best = dv;
        }
      }
    }
  return best;
}

InterfaceData classify_ses_grid(const Grid& grid, const AtomSet& atoms, double probe_radius,
                                const SesOptions& options) {
  if (!(probe_radius >= 0.0)) throw ValidationError("probe radius must be nonnegative");
  if (probe_radius == 0.0) return classify_union(grid, atoms, 0.0);

  const double cap = 2.0 * probe_radius;
  auto level = [&](const Vec3& p) { return distance_to_accessible(atoms, probe_radius, p, cap) - probe_radius; };

  // Nodes outside the solvent-accessible union are valid probe centers.
  std::vector<std::uint8_t> probe_ok(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Vec3 p = grid.node(grid.unravel(n));
    bool ok = true;
    for (const Atom& a : atoms) {
      const double r = a.radius + probe_radius;
      if (norm2(p - a.center) < r * r) {
        ok = false;
        break;
      }
    }
    probe_ok[n] = ok ? 1 : 0;
  }
  // A node within r_p of a lattice probe center is certainly solvent; only the remaining
  // nodes need the continuous distance.
  const std::vector<double> probe_dist = distance_transform(grid, probe_ok);
  std::vector<std::uint8_t> inside(grid.size(), 0);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (probe_dist[n] < probe_radius - 1e-9) continue;
    inside[n] = level(grid.node(grid.unravel(n))) > -kOnSurfaceTol ? 1 : 0;
  }

  for (std::size_t n = 0; n < grid.size(); ++n)
    if (inside[n] && grid.is_boundary(n)) throw ValidationError("solvent-excluded region reaches the grid boundary");

  const double h = grid.spacing();
  auto root = [&](Axis axis, const Index3& low, bool low_inside) {
    if (!options.refine) {
      Vec3 p1 = grid.node(low);
      p1[to_int(axis)] += h;
      const double f0 = level(grid.node(low));
      const double f1 = level(p1);
      return f0 / (f0 - f1);
    }
    double a = 0.0, b = 1.0;
    const Vec3 p0 = grid.node(low);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double mid = 0.5 * (a + b);
      Vec3 pm = p0;
      pm[to_int(axis)] += mid * h;
      const bool in = level(pm) > -kOnSurfaceTol;
      if (in == low_inside)
        a = mid;
      else
        b = mid;
    }
    return 0.5 * (a + b);
  };
  return detail::build_interface(grid, std::move(inside), root);
}

}  // namespace pbgfm
