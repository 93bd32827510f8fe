#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string_view>
#include <vector>

#include "pbgfm/vec3.hpp"

namespace pbgfm {

/// One solute atom: center in Angstrom, partial charge in units of e, radius in Angstrom.
struct Atom {
  Vec3 center;
  double charge = 0.0;
  double radius = 1.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Validated, nonempty, ordered atom list. Rejects nonpositive radii,
/// non-finite coordinates and duplicate centers.
class AtomSet {
 public:
  explicit AtomSet(std::vector<Atom> atoms);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  auto begin() const noexcept { return atoms_.begin(); }
  auto end() const noexcept { return atoms_.end(); }

  double max_radius() const noexcept;

  /// Same atoms with charges replaced; sizes must match.
  AtomSet with_charges(std::span<const double> charges) const;
  /// Same atoms rigidly translated.
  AtomSet translated(const Vec3& shift) const;

  friend bool operator==(const AtomSet&, const AtomSet&) = default;

 private:
  std::vector<Atom> atoms_;
};

/// Reads whitespace-separated `x y z q r` records, one atom per line.
/// Blank lines and lines starting with '#' are skipped.
AtomSet parse_atoms(std::istream& in);
AtomSet parse_atoms(std::string_view text);
AtomSet load_atoms(const std::filesystem::path& path);

}  // namespace pbgfm
