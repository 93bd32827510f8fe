#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pbgfm/atoms.hpp"
#include "pbgfm/vec3.hpp"

namespace pbgfm {

enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::X, Axis::Y, Axis::Z};

constexpr int to_int(Axis a) { return static_cast<int>(a); }
char axis_name(Axis a);

struct Index3 {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;

  constexpr std::size_t operator[](int axis) const { return axis == 0 ? i : (axis == 1 ? j : k); }
  constexpr std::size_t& operator[](int axis) { return axis == 0 ? i : (axis == 1 ? j : k); }
  friend constexpr bool operator==(const Index3&, const Index3&) = default;
};

/// Uniform Cartesian lattice; node (i,j,k) sits at origin + h*(i,j,k).
/// Linear index is i + Nx*(j + Ny*k).
class Grid {
 public:
  Grid(const Vec3& origin, double h, std::array<std::size_t, 3> n);

  const Vec3& origin() const noexcept { return origin_; }
  double spacing() const noexcept { return h_; }
  const std::array<std::size_t, 3>& dims() const noexcept { return n_; }
  std::size_t dim(Axis a) const noexcept { return n_[to_int(a)]; }
  std::size_t size() const noexcept { return n_[0] * n_[1] * n_[2]; }
  Vec3 upper() const noexcept;

  std::size_t stride(Axis a) const noexcept { return stride_[to_int(a)]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + n_[0] * (j + n_[1] * k);
  }
  std::size_t index(const Index3& p) const noexcept { return index(p.i, p.j, p.k); }
  Index3 unravel(std::size_t n) const noexcept;

  Vec3 node(std::size_t i, std::size_t j, std::size_t k) const noexcept;
  Vec3 node(const Index3& p) const noexcept { return node(p.i, p.j, p.k); }

  bool is_boundary(const Index3& p) const noexcept;
  bool is_boundary(std::size_t n) const noexcept { return is_boundary(unravel(n)); }
  /// True when p lies in the closed lattice hull (with a relative slack of 1e-12 h).
  bool contains(const Vec3& p) const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Vec3 origin_;
  double h_;
  std::array<std::size_t, 3> n_;
  std::array<std::size_t, 3> stride_;
};

/// Bounding box of the atoms (center +/- radius) padded by floor(2 r_p) Angstrom,
/// then expanded outward so each face lies on an integer multiple of h.
Grid build_grid(const AtomSet& atoms, double h, double probe_radius);

/// Lattice covering [lo, hi] exactly; hi - lo must be a multiple of h on every axis.
Grid grid_for_box(const Vec3& lo, const Vec3& hi, double h);

/// Scalar nodal values on a Grid.
class Field {
 public:
  explicit Field(const Grid& grid, double fill = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t n) noexcept { return values_[n]; }
  double operator[](std::size_t n) const noexcept { return values_[n]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) noexcept { return values_[grid_.index(i, j, k)]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return values_[grid_.index(i, j, k)];
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Trilinear blend of the 8 nodes of the cell containing p.
/// Throws DomainError when p is outside the lattice hull.
double trilinear(const Field& field, const Vec3& p);

/// `i,j,k,value` rows with a header line, x fastest.
void write_field_csv(std::ostream& out, const Field& field);

/// Little-endian dump: int64 Nx, Ny, Nz; float64 h, origin x, y, z; then Nx*Ny*Nz float64 values, x fastest.
void write_field_binary(std::ostream& out, const Field& field);
Field read_field_binary(std::istream& in);

}  // namespace pbgfm
