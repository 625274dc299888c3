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

// Core domain types: the square demand grid, its yearly demand history, and
// the capacitated supply points. Also the two instance CSV formats:
//
//   demand_history.csv   demand_point_index,x,y,<year1>,...,<yearK>
//   infrastructure.csv   supply_point_index,x,y,parking_slots,existing_scs,
//                        existing_fcs
//
// Demand points sit at integer cell centres (col, row) and are indexed in
// row-major order. Supply points may sit anywhere in the same coordinate
// system.

#ifndef EVPLACE_GRID_MODEL_HPP_
#define EVPLACE_GRID_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "evplace/csv.hpp"
#include "evplace/error.hpp"

namespace evplace {

class GridSpec {
 public:
  GridSpec(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw InvalidArgument("grid dimensions must be positive, got " +
                            std::to_string(width) + "x" +
                            std::to_string(height));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  int col(std::size_t index) const {
    return static_cast<int>(index % static_cast<std::size_t>(width_));
  }
  int row(std::size_t index) const {
    return static_cast<int>(index / static_cast<std::size_t>(width_));
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int width_;
  int height_;
};

// Yearly demand per cell. Values are stored point-major: the series of cell i
// occupies [i * year_count(), (i + 1) * year_count()).
class DemandHistory {
 public:
  DemandHistory(GridSpec grid, std::vector<int> years,
                std::vector<double> values)
      : grid_(grid), years_(std::move(years)), values_(std::move(values)) {
    if (years_.empty()) throw InvalidArgument("demand history has no years");
    for (std::size_t k = 1; k < years_.size(); ++k) {
      if (years_[k] != years_[k - 1] + 1) {
        throw InvalidArgument("history years must be consecutive");
      }
    }
    if (values_.size() != grid_.cell_count() * years_.size()) {
      throw InvalidArgument("demand history value count does not match grid");
    }
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidArgument("demand values must be finite and nonnegative");
      }
    }
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<int>& years() const { return years_; }
  std::size_t year_count() const { return years_.size(); }
  std::size_t point_count() const { return grid_.cell_count(); }
  int first_year() const { return years_.front(); }
  int last_year() const { return years_.back(); }

  double value(std::size_t point, std::size_t year_index) const {
    return values_[point * years_.size() + year_index];
  }
  std::span<const double> series(std::size_t point) const {
    return {values_.data() + point * years_.size(), years_.size()};
  }
  // Demand of every cell in one year.
  std::vector<double> year_slice(std::size_t year_index) const {
    std::vector<double> out(point_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i, year_index);
    return out;
  }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const DemandHistory&, const DemandHistory&) = default;

 private:
  GridSpec grid_;
  std::vector<int> years_;
  std::vector<double> values_;
};

struct SupplyPoint {
  int index = 0;
  double x = 0.0;
  double y = 0.0;
  int parking_slots = 0;
  int existing_scs = 0;
  int existing_fcs = 0;

  friend bool operator==(const SupplyPoint&, const SupplyPoint&) = default;
};

struct InfrastructureState {
  std::vector<SupplyPoint> supply_points;
  int baseline_year = 0;

  std::size_t size() const { return supply_points.size(); }

  // Throws InvalidArgument if indices are not 0..M-1 in order or a point holds
  // more chargers than parking slots.
  void validate() const {
    for (std::size_t j = 0; j < supply_points.size(); ++j) {
      const SupplyPoint& sp = supply_points[j];
      if (sp.index != static_cast<int>(j)) {
        throw InvalidArgument("supply indices must be contiguous from 0");
      }
      if (sp.parking_slots < 0 || sp.existing_scs < 0 || sp.existing_fcs < 0) {
        throw InvalidArgument("negative charger or slot count at supply point " +
                              std::to_string(j));
      }
      if (sp.existing_scs + sp.existing_fcs > sp.parking_slots) {
        throw InvalidArgument(
            "infeasible existing infrastructure at supply point " +
            std::to_string(j));
      }
      if (!std::isfinite(sp.x) || !std::isfinite(sp.y)) {
        throw InvalidArgument("non-finite position for supply point " +
                              std::to_string(j));
      }
    }
  }

  friend bool operator==(const InfrastructureState&,
                         const InfrastructureState&) = default;
};

// Dense demand-point x supply-point Euclidean distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t points, std::size_t supplies,
                 std::vector<double> d)
      : points_(points), supplies_(supplies), d_(std::move(d)) {
    if (d_.size() != points_ * supplies_) {
      throw InvalidArgument("distance matrix size mismatch");
    }
  }

  std::size_t point_count() const { return points_; }
  std::size_t supply_count() const { return supplies_; }
  double operator()(std::size_t i, std::size_t j) const {
    return d_[i * supplies_ + j];
  }
  std::span<const double> row(std::size_t i) const {
    return {d_.data() + i * supplies_, supplies_};
  }
  // Returns a copy with every entry multiplied by `factor`.
  DistanceMatrix scaled(double factor) const {
    std::vector<double> d = d_;
    for (double& v : d) v *= factor;
    return DistanceMatrix(points_, supplies_, std::move(d));
  }

 private:
  std::size_t points_ = 0;
  std::size_t supplies_ = 0;
  std::vector<double> d_;
};

inline double cell_distance(double x0, double y0, double x1, double y1) {
  return std::hypot(x1 - x0, y1 - y0);
}

inline DistanceMatrix distance_matrix(const GridSpec& grid,
                                      const InfrastructureState& supply) {
  const std::size_t n = grid.cell_count();
  const std::size_t m = supply.size();
  std::vector<double> d(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = grid.col(i);
    const double cy = grid.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const SupplyPoint& sp = supply.supply_points[j];
      d[i * m + j] = cell_distance(cx, cy, sp.x, sp.y);
    }
  }
  return DistanceMatrix(n, m, std::move(d));
}

// ---------------------------------------------------------------------------
// CSV formats
// ---------------------------------------------------------------------------

inline DemandHistory parse_demand_history(std::istream& in) {
  const std::vector<csv::Line> lines = csv::read_lines(in);
  if (lines.empty()) throw ParseError(0, "empty demand history file");

  const auto header = csv::split(lines[0].text);
  if (header.size() < 4 || csv::trim(header[0]) != "demand_point_index" ||
      csv::trim(header[1]) != "x" || csv::trim(header[2]) != "y") {
    throw ParseError(lines[0].number,
                     "expected header demand_point_index,x,y,<years...>");
  }
  std::vector<int> years;
  for (std::size_t k = 3; k < header.size(); ++k) {
    const auto year = csv::parse_int(header[k], lines[0].number, "year");
    if (!years.empty() && year != years.back() + 1) {
      throw ParseError(lines[0].number, "non-consecutive years in header");
    }
    years.push_back(static_cast<int>(year));
  }

  struct Row {
    std::size_t line;
    std::int64_t index;
    std::int64_t x;
    std::int64_t y;
  };
  std::vector<Row> rows;
  std::vector<double> raw;
  rows.reserve(lines.size() - 1);
  raw.reserve((lines.size() - 1) * years.size());
  std::int64_t max_x = -1;
  std::int64_t max_y = -1;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& line = lines[l];
    const auto fields = csv::split(line.text);
    if (fields.size() != header.size()) {
      throw ParseError(line.number,
                       "malformed row: expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    Row row{line.number,
            csv::parse_int(fields[0], line.number, "demand_point_index"),
            csv::parse_int(fields[1], line.number, "x"),
            csv::parse_int(fields[2], line.number, "y")};
    if (row.index < 0 || row.x < 0 || row.y < 0) {
      throw ParseError(line.number, "negative index or coordinate");
    }
    for (std::size_t k = 3; k < fields.size(); ++k) {
      const double v = csv::parse_double(fields[k], line.number, "demand");
      if (v < 0.0) throw ParseError(line.number, "negative demand");
      raw.push_back(v);
    }
    max_x = std::max(max_x, row.x);
    max_y = std::max(max_y, row.y);
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError(0, "demand history has no rows");
  if (max_x >= (1 << 20) || max_y >= (1 << 20)) {
    throw ParseError(0, "grid coordinates out of range");
  }

  const GridSpec grid(static_cast<int>(max_x + 1), static_cast<int>(max_y + 1));
  const std::size_t n = grid.cell_count();
  const std::size_t ny = years.size();
  std::vector<double> values(n * ny, 0.0);
  std::vector<char> seen(n, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (static_cast<std::size_t>(row.index) >= n) {
      throw ParseError(row.line, "demand point index " +
                                     std::to_string(row.index) +
                                     " outside grid");
    }
    const auto i = static_cast<std::size_t>(row.index);
    if (seen[i]) {
      throw ParseError(row.line, "duplicate demand point index " +
                                     std::to_string(row.index));
    }
    if (grid.index(static_cast<int>(row.x), static_cast<int>(row.y)) != i) {
      throw ParseError(row.line, "coordinates do not match row-major index " +
                                     std::to_string(row.index));
    }
    seen[i] = 1;
    std::copy_n(raw.begin() + static_cast<std::ptrdiff_t>(r * ny), ny,
                values.begin() + static_cast<std::ptrdiff_t>(i * ny));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) {
      throw ParseError(0, "missing demand point index " + std::to_string(i));
    }
  }
  return DemandHistory(grid, std::move(years), std::move(values));
}

inline void write_demand_history(std::ostream& out, const DemandHistory& h) {
  out << "demand_point_index,x,y";
  for (int year : h.years()) out << ',' << year;
  out << '\n';
  for (std::size_t i = 0; i < h.point_count(); ++i) {
    out << i << ',' << h.grid().col(i) << ',' << h.grid().row(i);
    for (double v : h.series(i)) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

inline InfrastructureState parse_infrastructure(std::istream& in,
                                                int baseline_year = 0) {
  const std::vector<csv::Line> lines = csv::read_lines(in);
  if (lines.empty()) throw ParseError(0, "empty infrastructure file");
  static constexpr const char* kHeader[] = {
      "supply_point_index", "x", "y", "parking_slots", "existing_scs",
      "existing_fcs"};
  const auto header = csv::split(lines[0].text);
  bool header_ok = header.size() == 6;
  for (std::size_t k = 0; header_ok && k < 6; ++k) {
    header_ok = csv::trim(header[k]) == kHeader[k];
  }
  if (!header_ok) {
    throw ParseError(lines[0].number,
                     "expected header supply_point_index,x,y,parking_slots,"
                     "existing_scs,existing_fcs");
  }

  InfrastructureState state;
  state.baseline_year = baseline_year;
  std::vector<std::size_t> line_of;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& line = lines[l];
    const auto f = csv::split(line.text);
    if (f.size() != 6) {
      throw ParseError(line.number, "malformed row: expected 6 fields, got " +
                                        std::to_string(f.size()));
    }
    SupplyPoint sp;
    const auto index = csv::parse_int(f[0], line.number, "supply_point_index");
    sp.x = csv::parse_double(f[1], line.number, "x");
    sp.y = csv::parse_double(f[2], line.number, "y");
    const auto slots = csv::parse_int(f[3], line.number, "parking_slots");
    const auto scs = csv::parse_int(f[4], line.number, "existing_scs");
    const auto fcs = csv::parse_int(f[5], line.number, "existing_fcs");
    if (index < 0 || slots < 0 || scs < 0 || fcs < 0) {
      throw ParseError(line.number, "negative index or count");
    }
    if (index > (1 << 24) || slots > (1 << 24) || scs > (1 << 24) ||
        fcs > (1 << 24)) {
      throw ParseError(line.number, "count out of range");
    }
    sp.index = static_cast<int>(index);
    sp.parking_slots = static_cast<int>(slots);
    sp.existing_scs = static_cast<int>(scs);
    sp.existing_fcs = static_cast<int>(fcs);
    if (sp.existing_scs + sp.existing_fcs > sp.parking_slots) {
      throw ParseError(line.number,
                       "infeasible existing infrastructure at supply point " +
                           std::to_string(sp.index));
    }
    state.supply_points.push_back(sp);
    line_of.push_back(line.number);
  }

  std::vector<std::size_t> order(state.supply_points.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return state.supply_points[a].index < state.supply_points[b].index;
  });
  std::vector<SupplyPoint> sorted;
  sorted.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const SupplyPoint& sp = state.supply_points[order[k]];
    if (sp.index != static_cast<int>(k)) {
      if (k > 0 && sp.index == sorted.back().index) {
        throw ParseError(line_of[order[k]], "duplicate supply point index " +
                                                std::to_string(sp.index));
      }
      throw ParseError(0, "missing supply point index " + std::to_string(k));
    }
    sorted.push_back(sp);
  }
  state.supply_points = std::move(sorted);
  return state;
}

inline void write_infrastructure(std::ostream& out,
                                 const InfrastructureState& s) {
  out << "supply_point_index,x,y,parking_slots,existing_scs,existing_fcs\n";
  for (const SupplyPoint& sp : s.supply_points) {
    out << sp.index << ',' << csv::format_double(sp.x) << ','
        << csv::format_double(sp.y) << ',' << sp.parking_slots << ','
        << sp.existing_scs << ',' << sp.existing_fcs << '\n';
  }
}

}  // namespace evplace

#endif  // EVPLACE_GRID_MODEL_HPP_
