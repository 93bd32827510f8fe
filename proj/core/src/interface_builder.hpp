#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pbgfm/surface.hpp"

namespace pbgfm::detail {

/// Scans every grid edge and asks `root(axis, low, low_inside)` for the interface fraction on
/// each edge whose endpoints disagree in `inside`.
template <class RootFn>
InterfaceData build_interface(const Grid& grid, std::vector<std::uint8_t> inside, RootFn&& root) {
  std::array<std::vector<Crossing>, 3> crossings;
  const auto& n = grid.dims();
  for (Axis axis : kAxes) {
    const int a = to_int(axis);
    const std::size_t s = grid.stride(axis);
    auto& out = crossings[a];
    for (std::size_t k = 0; k < n[2]; ++k)
      for (std::size_t j = 0; j < n[1]; ++j)
        for (std::size_t i = 0; i < n[0]; ++i) {
          const Index3 low{i, j, k};
          if (low[a] + 1 >= n[a]) continue;
          const std::size_t idx = grid.index(low);
          if (inside[idx] == inside[idx + s]) continue;
          out.push_back(make_crossing(grid, axis, low, root(axis, low, inside[idx] != 0)));
        }
  }
  return InterfaceData(grid, std::move(inside), std::move(crossings));
}

}  // namespace pbgfm::detail
