#pragma once

// Shared test inputs: manufactured line problems and small grids around a molecule.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "oracles.hpp"
#include "pbgfm/atoms.hpp"
#include "pbgfm/gfm.hpp"
#include "pbgfm/grid.hpp"

namespace fixture {

using namespace pbgfm;

struct Manufactured {
  std::vector<std::uint8_t> inside;
  std::vector<LineCrossing> crossings;
  std::vector<double> exact;
  double eps_in, eps_out, h;
};

// Piecewise-linear profile with interfaces at the given positions; segment s has slope/intercept
// (slope[s], icpt[s]) and side flag side[s]. Jumps follow [f] = solvent value - solute value.
inline Manufactured make_profile(std::size_t n, const std::vector<double>& cuts, const std::vector<double>& slope,
                          const std::vector<double>& icpt, const std::vector<bool>& side_inside, double eps_in,
                          double eps_out) {
  Manufactured m{{}, {}, {}, eps_in, eps_out, 1.0 / static_cast<double>(n - 1)};
  auto segment = [&](double x) {
    std::size_t s = 0;
    while (s < cuts.size() && x > cuts[s]) ++s;
    return s;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) * m.h;
    const std::size_t s = segment(x);
    m.inside.push_back(side_inside[s] ? 1 : 0);
    m.exact.push_back(slope[s] * x + icpt[s]);
  }
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const double x = cuts[c];
    const std::size_t e = static_cast<std::size_t>(std::floor(x / m.h));
    const double theta = x / m.h - static_cast<double>(e);
    const std::size_t in_seg = side_inside[c] ? c : c + 1, out_seg = side_inside[c] ? c + 1 : c;
    JumpData j;
    j.a = (slope[out_seg] * x + icpt[out_seg]) - (slope[in_seg] * x + icpt[in_seg]);
    j.b = eps_out * slope[out_seg] - eps_in * slope[in_seg];
    m.crossings.push_back({e, theta, j});
  }
  return m;
}

inline std::vector<double> solve_steady(const LineSystem& sys) {
  // A v + c + boundary = 0
  const auto A = oracle::dense_line_matrix(sys);
  std::vector<double> rhs(sys.corr.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -sys.corr[i];
  rhs.front() -= sys.w.front() * sys.bc_lo;
  rhs.back() -= sys.w.back() * sys.bc_hi;
  return oracle::dense_solve(A, rhs);
}


inline pbgfm::Grid grid17(const pbgfm::AtomSet& atoms, double probe) {
  // 17 nodes per axis covering the probe-padded bounding box
  pbgfm::Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const pbgfm::Atom& a : atoms)
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], a.center[d] - a.radius - probe);
      hi[d] = std::max(hi[d], a.center[d] + a.radius + probe);
    }
  double ext = 0.0;
  for (int d = 0; d < 3; ++d) ext = std::max(ext, hi[d] - lo[d]);
  const double h = (ext + 1.0) / 16.0;
  pbgfm::Vec3 origin;
  for (int d = 0; d < 3; ++d) origin[d] = 0.5 * (lo[d] + hi[d]) - 8.0 * h;
  return pbgfm::Grid(origin, h, {17, 17, 17});
}

}  // namespace fixture
