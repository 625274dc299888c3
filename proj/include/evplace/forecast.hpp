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

// Demand forecasting: kappa-weighted spatial smoothing of each year's demand
// field, a least-squares cubic per cell over the smoothed series, and a
// hold-out search for the smoothing exponent.
//
// The smoothed demand of cell k is
//
//   S(D)_k = sum_j D_j (1 + d_jk)^-kappa / sum_j (1 + d_jk)^-kappa
//
// where d_jk is the distance between cell centres and both sums run over all
// cells, k included. kappa = 0 gives the global mean and kappa -> infinity
// gives the identity.

#ifndef EVPLACE_FORECAST_HPP_
#define EVPLACE_FORECAST_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "evplace/csv.hpp"
#include "evplace/error.hpp"
#include "evplace/grid_model.hpp"
#include "evplace/parallel.hpp"

namespace evplace {

class SmoothingParam {
 public:
  explicit SmoothingParam(double kappa) : kappa_(kappa) {
    if (!std::isfinite(kappa) || kappa < 0.0) {
      throw InvalidArgument("kappa must be finite and nonnegative");
    }
  }
  double kappa() const { return kappa_; }

 private:
  double kappa_;
};

// Cubic in normalised time t' = year - first_year.
struct PolyCoeffs {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  double operator()(double t) const { return c0 + t * (c1 + t * (c2 + t * c3)); }
};

struct DemandForecast {
  GridSpec grid{1, 1};
  std::vector<int> target_years;
  // Point-major: predicted[i * target_years.size() + y].
  std::vector<double> predicted;
  double kappa_used = 0.0;
  double holdout_mse = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> kappa_grid;

  std::size_t point_count() const { return grid.cell_count(); }
  double value(std::size_t point, std::size_t year_index) const {
    return predicted[point * target_years.size() + year_index];
  }
  std::vector<double> year_slice(std::size_t year_index) const {
    std::vector<double> out(point_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i, year_index);
    return out;
  }
};

struct KappaSearchResult {
  SmoothingParam best{0.0};
  std::vector<std::pair<double, double>> mse_curve;  // (kappa, mse)
};

// 0.0, 0.1, ..., 10.0.
inline std::vector<double> default_kappa_grid() {
  std::vector<double> grid;
  grid.reserve(101);
  for (int k = 0; k <= 100; ++k) grid.push_back(k / 10.0);
  return grid;
}

// Precomputed smoothing operator for one grid and one kappa. Weights depend
// only on the cell displacement, so the table has (2w-1) x h entries.
class SpatialKernel {
 public:
  SpatialKernel(const GridSpec& grid, SmoothingParam kappa)
      : grid_(grid), stride_(2 * static_cast<std::size_t>(grid.width()) - 1) {
    const int w = grid.width();
    const int h = grid.height();
    table_.resize(stride_ * static_cast<std::size_t>(h));
    for (int dy = 0; dy < h; ++dy) {
      for (int dx = -(w - 1); dx <= w - 1; ++dx) {
        const double d = std::hypot(static_cast<double>(dx),
                                    static_cast<double>(dy));
        table_[static_cast<std::size_t>(dy) * stride_ +
               static_cast<std::size_t>(dx + w - 1)] =
            std::pow(1.0 + d, -kappa.kappa());
      }
    }
    const std::size_t n = grid.cell_count();
    denominator_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int yj = 0; yj < h; ++yj) {
        const double* wrow = row_weights(k, yj);
        for (int xj = 0; xj < w; ++xj) acc += wrow[xj];
      }
      denominator_[k] = acc;
    }
  }

  const GridSpec& grid() const { return grid_; }

  // `fields` is point-major with `count` values per cell; so is the result.
  // Sums run over j in ascending index order for every output entry.
  std::vector<double> apply(std::span<const double> fields,
                            std::size_t count) const {
    const std::size_t n = grid_.cell_count();
    if (fields.size() != n * count) {
      throw InvalidArgument("field size does not match grid");
    }
    const int w = grid_.width();
    const int h = grid_.height();
    std::vector<double> out(n * count, 0.0);
    std::vector<double> acc(count);
    for (std::size_t k = 0; k < n; ++k) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int yj = 0; yj < h; ++yj) {
        const double* wrow = row_weights(k, yj);
        const double* src =
            fields.data() + grid_.index(0, yj) * count;
        for (int xj = 0; xj < w; ++xj) {
          const double wt = wrow[xj];
          const double* v = src + static_cast<std::size_t>(xj) * count;
          for (std::size_t f = 0; f < count; ++f) acc[f] += wt * v[f];
        }
      }
      for (std::size_t f = 0; f < count; ++f) {
        out[k * count + f] = acc[f] / denominator_[k];
      }
    }
    return out;
  }

 private:
  // Pointer p such that p[xj] is the weight between cell k and (xj, yj).
  const double* row_weights(std::size_t k, int yj) const {
    const int xk = grid_.col(k);
    const int yk = grid_.row(k);
    const auto dy = static_cast<std::size_t>(std::abs(yj - yk));
    return table_.data() + dy * stride_ +
           static_cast<std::size_t>(grid_.width() - 1 - xk);
  }

  GridSpec grid_;
  std::size_t stride_;
  std::vector<double> table_;
  std::vector<double> denominator_;
};

inline std::vector<double> smooth_demand(std::span<const double> values,
                                         const GridSpec& grid,
                                         SmoothingParam kappa) {
  if (values.size() != grid.cell_count()) {
    throw InvalidArgument("value count does not match grid");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("demand values must be finite and nonnegative");
    }
  }
  return SpatialKernel(grid, kappa).apply(values, 1);
}

// Least-squares cubic fit for a fixed set of sample times, factorised once
// (Householder QR) and reused for any number of series.
class CubicFitter {
 public:
  explicit CubicFitter(std::span<const double> times) : rows_(times.size()) {
    if (times.size() < 4) {
      throw InsufficientHistory("insufficient history: cubic fit needs at "
                                "least 4 points, got " +
                                std::to_string(times.size()));
    }
    Eigen::MatrixXd design(times.size(), 4);
    for (std::size_t r = 0; r < times.size(); ++r) {
      const double t = times[r];
      design(r, 0) = 1.0;
      design(r, 1) = t;
      design(r, 2) = t * t;
      design(r, 3) = t * t * t;
    }
    qr_.compute(design);
    if (qr_.rank() < 4) {
      throw InvalidArgument("cubic fit needs at least 4 distinct years");
    }
  }

  PolyCoeffs fit(std::span<const double> values) const {
    if (values.size() != rows_) {
      throw InvalidArgument("series length does not match fit times");
    }
    const Eigen::Map<const Eigen::VectorXd> rhs(values.data(),
                                                static_cast<Eigen::Index>(rows_));
    const Eigen::Vector4d c = qr_.solve(rhs);
    return {c(0), c(1), c(2), c(3)};
  }

 private:
  std::size_t rows_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

inline PolyCoeffs fit_cubic(std::span<const std::pair<int, double>> series) {
  if (series.size() < 4) {
    throw InsufficientHistory("insufficient history: cubic fit needs at least "
                              "4 points, got " +
                              std::to_string(series.size()));
  }
  const int first_year = series.front().first;
  std::vector<double> times;
  std::vector<double> values;
  for (const auto& [year, value] : series) {
    times.push_back(static_cast<double>(year - first_year));
    values.push_back(value);
  }
  for (std::size_t a = 1; a < times.size(); ++a) {
    if (times[a] <= times[a - 1]) {
      throw InvalidArgument("cubic fit years must be distinct and increasing");
    }
  }
  return CubicFitter(times).fit(values);
}

// Evaluates the cubic at target - first_year; negative results clamp to 0.
inline double predict_year(const PolyCoeffs& coeffs, int first_year,
                           int target) {
  if (target < first_year) {
    throw InvalidArgument("target year precedes the first fitted year");
  }
  return std::max(0.0, coeffs(static_cast<double>(target - first_year)));
}

namespace detail {

// Smooths `year_count` leading years of `history`, fits a cubic per cell and
// returns clamped predictions at each of `targets` (point-major).
inline std::vector<double> smooth_fit_predict(const DemandHistory& history,
                                              const SpatialKernel& kernel,
                                              std::size_t year_count,
                                              std::span<const int> targets) {
  const std::size_t n = history.point_count();
  std::vector<double> fields(n * year_count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < year_count; ++y) {
      fields[i * year_count + y] = history.value(i, y);
    }
  }
  const std::vector<double> smoothed = kernel.apply(fields, year_count);
  std::vector<double> times(year_count);
  for (std::size_t y = 0; y < year_count; ++y) times[y] = static_cast<double>(y);
  const CubicFitter fitter(times);
  std::vector<double> out(n * targets.size());
  for (std::size_t i = 0; i < n; ++i) {
    const PolyCoeffs c = fitter.fit(
        std::span<const double>(smoothed.data() + i * year_count, year_count));
    for (std::size_t t = 0; t < targets.size(); ++t) {
      out[i * targets.size() + t] =
          predict_year(c, history.first_year(), targets[t]);
    }
  }
  return out;
}

}  // namespace detail

// Mean squared error, over cells, of predicting the last history year from the
// earlier years smoothed with `kappa`. Compared against raw demand.
inline double holdout_mse(const DemandHistory& history, SmoothingParam kappa) {
  if (history.year_count() < 5) {
    throw InsufficientHistory(
        "insufficient history: kappa tuning needs at least 5 years, got " +
        std::to_string(history.year_count()));
  }
  const SpatialKernel kernel(history.grid(), kappa);
  const int target = history.last_year();
  const std::vector<double> predicted = detail::smooth_fit_predict(
      history, kernel, history.year_count() - 1, std::span<const int>(&target, 1));
  const std::size_t last = history.year_count() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < history.point_count(); ++i) {
    const double e = predicted[i] - history.value(i, last);
    sum += e * e;
  }
  return sum / static_cast<double>(history.point_count());
}

// Relative MSE difference below which two kappas count as tied.
inline constexpr double kTieTolerance = 1e-12;

inline KappaSearchResult tune_kappa(const DemandHistory& history,
                                    std::span<const double> kappa_grid,
                                    int threads = 1) {
  if (kappa_grid.empty()) throw InvalidArgument("kappa grid is empty");
  if (history.year_count() < 5) {
    throw InsufficientHistory(
        "insufficient history: kappa tuning needs at least 5 years, got " +
        std::to_string(history.year_count()));
  }
  std::vector<double> mse(kappa_grid.size());
  for (double k : kappa_grid) SmoothingParam check(k);
  parallel_for(kappa_grid.size(), threads, [&](std::size_t k) {
    mse[k] = holdout_mse(history, SmoothingParam(kappa_grid[k]));
  });
  KappaSearchResult result;
  std::size_t best = 0;
  for (std::size_t k = 0; k < kappa_grid.size(); ++k) {
    result.mse_curve.emplace_back(kappa_grid[k], mse[k]);
    if (mse[k] < mse[best]) best = k;
  }
  // Curves that are flat up to rounding (e.g. a spatially constant field)
  // resolve to the smallest kappa.
  const double cutoff = mse[best] + kTieTolerance * std::abs(mse[best]);
  for (std::size_t k = 0; k < kappa_grid.size(); ++k) {
    if (mse[k] <= cutoff && kappa_grid[k] < kappa_grid[best]) best = k;
  }
  result.best = SmoothingParam(kappa_grid[best]);
  return result;
}

// Smooths every history year, fits one cubic per cell and evaluates it at each
// target year. The hold-out MSE for `kappa` is recorded when the history is
// long enough to compute it.
inline DemandForecast forecast_demand(const DemandHistory& history,
                                      SmoothingParam kappa,
                                      std::vector<int> target_years) {
  if (target_years.empty()) throw InvalidArgument("no target years");
  for (std::size_t t = 0; t < target_years.size(); ++t) {
    if (target_years[t] <= history.last_year()) {
      throw InvalidArgument("target year " + std::to_string(target_years[t]) +
                            " is not after the last history year");
    }
    if (t > 0 && target_years[t] <= target_years[t - 1]) {
      throw InvalidArgument("target years must be strictly increasing");
    }
  }
  if (history.year_count() < 4) {
    throw InsufficientHistory(
        "insufficient history: forecasting needs at least 4 years, got " +
        std::to_string(history.year_count()));
  }
  DemandForecast out;
  out.grid = history.grid();
  out.target_years = std::move(target_years);
  out.kappa_used = kappa.kappa();
  const SpatialKernel kernel(history.grid(), kappa);
  out.predicted = detail::smooth_fit_predict(history, kernel,
                                             history.year_count(),
                                             out.target_years);
  if (history.year_count() >= 5) out.holdout_mse = holdout_mse(history, kappa);
  out.kappa_grid = {kappa.kappa()};
  return out;
}

// ---------------------------------------------------------------------------
// forecast.csv: demand_point_index,<year1>,<year2>,...
// forecast_meta.txt: key=value lines.
// ---------------------------------------------------------------------------

// Per-cell values for a list of years; also used for ground_truth.csv.
struct YearTable {
  std::vector<int> years;
  std::size_t point_count = 0;
  std::vector<double> values;  // point-major

  double value(std::size_t point, std::size_t year_index) const {
    return values[point * years.size() + year_index];
  }
  std::vector<double> year_slice(std::size_t year_index) const {
    std::vector<double> out(point_count);
    for (std::size_t i = 0; i < point_count; ++i) out[i] = value(i, year_index);
    return out;
  }
  // Index of `year` in `years`, or -1.
  int find_year(int year) const {
    for (std::size_t k = 0; k < years.size(); ++k) {
      if (years[k] == year) return static_cast<int>(k);
    }
    return -1;
  }
};

inline void write_year_table(std::ostream& out, const YearTable& table) {
  out << "demand_point_index";
  for (int y : table.years) out << ',' << y;
  out << '\n';
  for (std::size_t i = 0; i < table.point_count; ++i) {
    out << i;
    for (std::size_t y = 0; y < table.years.size(); ++y) {
      out << ',' << csv::format_double(table.value(i, y));
    }
    out << '\n';
  }
}

inline YearTable parse_year_table(std::istream& in) {
  const std::vector<csv::Line> lines = csv::read_lines(in);
  if (lines.empty()) throw ParseError(0, "empty forecast file");
  const auto header = csv::split(lines[0].text);
  if (header.size() < 2 || csv::trim(header[0]) != "demand_point_index") {
    throw ParseError(lines[0].number,
                     "expected header demand_point_index,<years...>");
  }
  YearTable table;
  for (std::size_t k = 1; k < header.size(); ++k) {
    const auto year = csv::parse_int(header[k], lines[0].number, "year");
    if (!table.years.empty() && year <= table.years.back()) {
      throw ParseError(lines[0].number, "years must be strictly increasing");
    }
    table.years.push_back(static_cast<int>(year));
  }
  const std::size_t ny = table.years.size();
  table.point_count = lines.size() - 1;
  table.values.assign(table.point_count * ny, 0.0);
  std::vector<char> seen(table.point_count, 0);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& line = lines[l];
    const auto f = csv::split(line.text);
    if (f.size() != header.size()) {
      throw ParseError(line.number, "malformed row: expected " +
                                        std::to_string(header.size()) +
                                        " fields, got " +
                                        std::to_string(f.size()));
    }
    const auto index = csv::parse_int(f[0], line.number, "demand_point_index");
    if (index < 0 || static_cast<std::size_t>(index) >= table.point_count) {
      throw ParseError(line.number, "demand point index out of range");
    }
    const auto i = static_cast<std::size_t>(index);
    if (seen[i]) {
      throw ParseError(line.number, "duplicate demand point index " +
                                        std::to_string(index));
    }
    seen[i] = 1;
    for (std::size_t y = 0; y < ny; ++y) {
      const double v = csv::parse_double(f[y + 1], line.number, "demand");
      if (v < 0.0) throw ParseError(line.number, "negative demand");
      table.values[i * ny + y] = v;
    }
  }
  return table;
}

inline YearTable to_year_table(const DemandForecast& f) {
  return {f.target_years, f.point_count(), f.predicted};
}

struct ForecastMeta {
  int grid_width = 0;
  int grid_height = 0;
  double kappa_used = 0.0;
  double holdout_mse = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> kappa_grid;
  int history_first_year = 0;
  int history_last_year = 0;
};

inline void write_forecast_meta(std::ostream& out, const ForecastMeta& m) {
  out << "grid_width=" << m.grid_width << '\n';
  out << "grid_height=" << m.grid_height << '\n';
  out << "kappa_used=" << csv::format_double(m.kappa_used) << '\n';
  out << "holdout_mse="
      << (std::isfinite(m.holdout_mse) ? csv::format_double(m.holdout_mse)
                                       : std::string("nan"))
      << '\n';
  out << "kappa_grid=";
  for (std::size_t k = 0; k < m.kappa_grid.size(); ++k) {
    if (k) out << ' ';
    out << csv::format_double(m.kappa_grid[k]);
  }
  out << '\n';
  out << "history_first_year=" << m.history_first_year << '\n';
  out << "history_last_year=" << m.history_last_year << '\n';
}

inline ForecastMeta parse_forecast_meta(std::istream& in) {
  std::map<std::string, std::pair<std::size_t, std::string>> kv;
  for (const auto& line : csv::read_lines(in)) {
    const auto eq = line.text.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line.number, "expected key=value");
    }
    kv[std::string(csv::trim(std::string_view(line.text).substr(0, eq)))] = {
        line.number, line.text.substr(eq + 1)};
  }
  auto need = [&](const std::string& key) -> const auto& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(0, "forecast meta is missing " + key);
    return it->second;
  };
  ForecastMeta m;
  {
    const auto& [ln, v] = need("grid_width");
    m.grid_width = static_cast<int>(csv::parse_int(v, ln, "grid_width"));
  }
  {
    const auto& [ln, v] = need("grid_height");
    m.grid_height = static_cast<int>(csv::parse_int(v, ln, "grid_height"));
  }
  {
    const auto& [ln, v] = need("kappa_used");
    m.kappa_used = csv::parse_double(v, ln, "kappa_used");
  }
  {
    const auto& [ln, v] = need("holdout_mse");
    if (csv::trim(v) != "nan") m.holdout_mse = csv::parse_double(v, ln, "mse");
  }
  {
    const auto& [ln, v] = need("kappa_grid");
    for (auto field : csv::split(csv::trim(v), ' ')) {
      if (!field.empty()) m.kappa_grid.push_back(csv::parse_double(field, ln, "kappa"));
    }
  }
  {
    const auto& [ln, v] = need("history_first_year");
    m.history_first_year = static_cast<int>(csv::parse_int(v, ln, "year"));
  }
  {
    const auto& [ln, v] = need("history_last_year");
    m.history_last_year = static_cast<int>(csv::parse_int(v, ln, "year"));
  }
  return m;
}

}  // namespace evplace

#endif  // EVPLACE_FORECAST_HPP_
