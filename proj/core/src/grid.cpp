#include "pbgfm/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "pbgfm/error.hpp"

namespace pbgfm {

char axis_name(Axis a) {
  switch (a) {
    case Axis::X: return 'x';
    case Axis::Y: return 'y';
    case Axis::Z: return 'z';
  }
  return '?';
}

Grid::Grid(const Vec3& origin, double h, std::array<std::size_t, 3> n) : origin_(origin), h_(h), n_(n) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid spacing must be positive");
  if (!is_finite(origin)) throw ValidationError("grid origin must be finite");
  for (std::size_t d : n)
    if (d < 4) throw ValidationError("grid needs at least 4 nodes per axis");
  stride_ = {1, n_[0], n_[0] * n_[1]};
}

Vec3 Grid::upper() const noexcept {
  return {origin_.x + h_ * static_cast<double>(n_[0] - 1), origin_.y + h_ * static_cast<double>(n_[1] - 1),
          origin_.z + h_ * static_cast<double>(n_[2] - 1)};
}

Index3 Grid::unravel(std::size_t n) const noexcept {
  Index3 p;
  p.i = n % n_[0];
  n /= n_[0];
  p.j = n % n_[1];
  p.k = n / n_[1];
  return p;
}

Vec3 Grid::node(std::size_t i, std::size_t j, std::size_t k) const noexcept {
  return {origin_.x + h_ * static_cast<double>(i), origin_.y + h_ * static_cast<double>(j),
          origin_.z + h_ * static_cast<double>(k)};
}

bool Grid::is_boundary(const Index3& p) const noexcept {
  return p.i == 0 || p.j == 0 || p.k == 0 || p.i + 1 == n_[0] || p.j + 1 == n_[1] || p.k + 1 == n_[2];
}

bool Grid::contains(const Vec3& p) const noexcept {
  const Vec3 hi = upper();
  const double slack = 1e-12 * h_;
  for (int a = 0; a < 3; ++a)
    if (!(p[a] >= origin_[a] - slack && p[a] <= hi[a] + slack)) return false;
  return true;
}

namespace {

// Snaps x onto the lattice {m*h}; values within 1e-9 of a lattice point are taken as on it.
double snap_down(double x, double h) {
  const double q = x / h;
  const double m = std::round(q);
  return h * (std::abs(q - m) < 1e-9 ? m : std::floor(q));
}

double snap_up(double x, double h) {
  const double q = x / h;
  const double m = std::round(q);
  return h * (std::abs(q - m) < 1e-9 ? m : std::ceil(q));
}

}  // namespace

Grid build_grid(const AtomSet& atoms, double h, double probe_radius) {
  if (!(h > 0.0)) throw ValidationError("grid spacing must be positive");
  if (!(probe_radius >= 0.0)) throw ValidationError("probe radius must be nonnegative");

  const double pad = std::max(std::floor(2.0 * probe_radius), probe_radius);
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi = -lo;
  for (const Atom& a : atoms) {
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], a.center[d] - a.radius);
      hi[d] = std::max(hi[d], a.center[d] + a.radius);
    }
  }

  std::array<std::size_t, 3> n{};
  Vec3 origin;
  for (int d = 0; d < 3; ++d) {
    double box_lo = snap_down(lo[d] - pad, h);
    double box_hi = snap_up(hi[d] + pad, h);
    // The probe-inflated spheres must stay strictly inside the box.
    if (box_lo >= lo[d] - probe_radius) box_lo -= h;
    if (box_hi <= hi[d] + probe_radius) box_hi += h;
    const double cells = std::round((box_hi - box_lo) / h);
    if (cells < 3.0) throw ValidationError("grid spacing is larger than the padded bounding box");
    origin[d] = box_lo;
    n[d] = static_cast<std::size_t>(cells) + 1;
  }
  return Grid(origin, h, n);
}

Grid grid_for_box(const Vec3& lo, const Vec3& hi, double h) {
  if (!(h > 0.0)) throw ValidationError("grid spacing must be positive");
  std::array<std::size_t, 3> n{};
  for (int d = 0; d < 3; ++d) {
    const double cells = (hi[d] - lo[d]) / h;
    const double rounded = std::round(cells);
    if (!(rounded >= 3.0) || std::abs(cells - rounded) > 1e-9 * std::max(1.0, rounded))
      throw ValidationError("box extent must be a multiple of h spanning at least 3 cells");
    n[d] = static_cast<std::size_t>(rounded) + 1;
  }
  return Grid(lo, h, n);
}

Field::Field(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ValidationError("field length does not match grid size");
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double trilinear(const Field& field, const Vec3& p) {
  const Grid& g = field.grid();
  if (!g.contains(p)) throw DomainError("interpolation point lies outside the grid");
  const double h = g.spacing();
  std::size_t base[3];
  double frac[3];
  for (int d = 0; d < 3; ++d) {
    const double s = (p[d] - g.origin()[d]) / h;
    const double cells = static_cast<double>(g.dims()[d] - 1);
    double cell = std::floor(s);
    cell = std::clamp(cell, 0.0, cells - 1.0);
    base[d] = static_cast<std::size_t>(cell);
    frac[d] = std::clamp(s - cell, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int c = 0; c < 8; ++c) {
    const std::size_t di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                     (dk ? frac[2] : 1.0 - frac[2]);
    if (w != 0.0) sum += w * field.at(base[0] + di, base[1] + dj, base[2] + dk);
  }
  return sum;
}

void write_field_csv(std::ostream& out, const Field& field) {
  const Grid& g = field.grid();
  out << "i,j,k,value\n";
  out.precision(17);
  for (std::size_t k = 0; k < g.dims()[2]; ++k)
    for (std::size_t j = 0; j < g.dims()[1]; ++j)
      for (std::size_t i = 0; i < g.dims()[0]; ++i)
        out << i << ',' << j << ',' << k << ',' << field.at(i, j, k) << '\n';
  if (!out) throw IoError("failed writing field CSV");
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  auto bits = std::bit_cast<std::uint64_t>(value);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.write(bytes, 8);
}

template <class T>
T get_le(std::istream& in) {
  char bytes[8];
  if (!in.read(bytes, 8)) throw IoError("truncated binary field");
  std::uint64_t bits;
  std::memcpy(&bits, bytes, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_field_binary(std::ostream& out, const Field& field) {
  const Grid& g = field.grid();
  for (std::size_t d : g.dims()) put_le<std::int64_t>(out, static_cast<std::int64_t>(d));
  put_le<double>(out, g.spacing());
  for (int d = 0; d < 3; ++d) put_le<double>(out, g.origin()[d]);
  for (double v : field.values()) put_le<double>(out, v);
  if (!out) throw IoError("failed writing binary field");
}

Field read_field_binary(std::istream& in) {
  std::array<std::size_t, 3> n{};
  for (auto& d : n) {
    const auto v = get_le<std::int64_t>(in);
    if (v < 4) throw IoError("binary field has invalid dimensions");
    d = static_cast<std::size_t>(v);
  }
  const double h = get_le<double>(in);
  Vec3 origin;
  for (int d = 0; d < 3; ++d) origin[d] = get_le<double>(in);
  Grid g(origin, h, n);
  std::vector<double> values(g.size());
  for (double& v : values) v = get_le<double>(in);
  return Field(g, std::move(values));
}

}  // namespace pbgfm
