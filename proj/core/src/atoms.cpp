#include "pbgfm/atoms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "pbgfm/error.hpp"

namespace pbgfm {

AtomSet::AtomSet(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("atom set is empty");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (!is_finite(a.center) || !std::isfinite(a.charge) || !std::isfinite(a.radius))
      throw ValidationError("atom " + std::to_string(i) + " has non-finite data");
    if (a.radius <= 0.0)
      throw ValidationError("atom " + std::to_string(i) + " has nonpositive radius");
  }
  // Duplicate-center check on a sorted copy keeps this O(n log n).
  std::vector<Vec3> centers;
  centers.reserve(atoms_.size());
  for (const Atom& a : atoms_) centers.push_back(a.center);
  std::sort(centers.begin(), centers.end(), [](const Vec3& a, const Vec3& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
  });
  if (std::adjacent_find(centers.begin(), centers.end()) != centers.end())
    throw ValidationError("two atoms share the same center");
}

double AtomSet::max_radius() const noexcept {
  double r = 0.0;
  for (const Atom& a : atoms_) r = std::max(r, a.radius);
  return r;
}

AtomSet AtomSet::with_charges(std::span<const double> charges) const {
  if (charges.size() != atoms_.size()) throw ValidationError("charge count does not match atom count");
  std::vector<Atom> out = atoms_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].charge = charges[i];
  return AtomSet(std::move(out));
}

AtomSet AtomSet::translated(const Vec3& shift) const {
  std::vector<Atom> out = atoms_;
  for (Atom& a : out) a.center += shift;
  return AtomSet(std::move(out));
}

namespace {

bool parse_double(std::string_view token, double& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

}  // namespace

AtomSet parse_atoms(std::istream& in) {
  std::vector<Atom> atoms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    std::string token;
    double values[5];
    int count = 0;
    while (fields >> token) {
      if (count == 5) throw ParseError("expected 5 fields (x y z q r), found more", line_no);
      if (!parse_double(token, values[count]))
        throw ParseError("malformed number '" + token + "'", line_no);
      ++count;
    }
    if (count != 5)
      throw ParseError("expected 5 fields (x y z q r), found " + std::to_string(count), line_no);
    if (values[4] <= 0.0)
      throw ValidationError("line " + std::to_string(line_no) + ": atom radius must be positive");
    atoms.push_back(Atom{{values[0], values[1], values[2]}, values[3], values[4]});
  }
  return AtomSet(std::move(atoms));
}

AtomSet parse_atoms(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_atoms(in);
}

AtomSet load_atoms(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open atom file " + path.string());
  return parse_atoms(in);
}

}  // namespace pbgfm
