// Copyright 2026 The evplace Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary PGM (P5) rendering of a demand grid, one pixel per cell, row 0 at
// the top. Values are min-max normalised to 0..255; a constant field renders
// as 128.

#ifndef EVPLACE_HEATMAP_HPP_
#define EVPLACE_HEATMAP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "evplace/error.hpp"
#include "evplace/grid_model.hpp"

namespace evplace {

inline std::vector<std::uint8_t> heatmap_pixels(
    std::span<const double> values, const GridSpec& grid,
    std::span<const SupplyPoint> marks = {}) {
  if (values.empty()) throw InvalidArgument("empty grid");
  if (values.size() != grid.cell_count()) {
    throw InvalidArgument("heatmap: " + std::to_string(values.size()) +
                          " values for a " + std::to_string(grid.width()) +
                          "x" + std::to_string(grid.height()) + " grid");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<std::uint8_t> px(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    px[i] = range > 0.0 ? static_cast<std::uint8_t>(
                              std::lround(255.0 * (values[i] - lo) / range))
                        : std::uint8_t{128};
  }
  for (const SupplyPoint& sp : marks) {
    const long cx = std::lround(sp.x);
    const long cy = std::lround(sp.y);
    const long arms[5][2] = {{0, 0}, {-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    for (const auto& a : arms) {
      const long x = cx + a[0];
      const long y = cy + a[1];
      if (x < 0 || y < 0 || x >= grid.width() || y >= grid.height()) continue;
      px[grid.index(static_cast<int>(x), static_cast<int>(y))] = 255;
    }
  }
  return px;
}

inline void write_pgm(std::ostream& out, std::span<const double> values,
                      const GridSpec& grid,
                      std::span<const SupplyPoint> marks = {}) {
  const auto px = heatmap_pixels(values, grid, marks);
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()),
            static_cast<std::streamsize>(px.size()));
}

}  // namespace evplace

#endif  // EVPLACE_HEATMAP_HPP_
