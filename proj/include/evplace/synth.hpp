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

// Seeded synthetic instances.
//
// The true field is a rough random field U^roughness smoothed with
// base_kappa and normalised to mean demand_scale. Each cell then follows
//
//   D_i(t) = F_i * (1 + a_i t + b_i t^2 + c_i t^3) * (1 + noise_sigma * z)
//
// with t counted from the first history year, per-cell coefficients drawn
// uniformly from the trend ranges and z standard normal; values are clamped
// at 0. Ground truth covers the years after the history and carries no
// noise. If the busiest year would exceed max_load_fraction of the capacity
// reachable with fast chargers in every slot, all demand is scaled down.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Uniform and normal variates are derived here (53-bit
// uniforms, Box-Muller) because the standard distributions are
// implementation-defined. Each concern draws from its own stream so that,
// for example, changing noise_sigma does not move the supply points.

#ifndef EVPLACE_SYNTH_HPP_
#define EVPLACE_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "evplace/error.hpp"
#include "evplace/forecast.hpp"
#include "evplace/grid_model.hpp"

namespace evplace {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthConfig {
  std::uint64_t seed = 42;
  GridSpec grid{64, 64};
  int n_supply = 100;
  int first_year = 2010;
  int history_years = 9;
  int future_years = 2;
  double base_kappa = 4.7;
  double roughness = 3.0;
  // Per-cell coefficients of t, t^2 and t^3, relative to the base field.
  Interval trend_linear{0.0, 0.12};
  Interval trend_quadratic{-0.004, 0.006};
  Interval trend_cubic{-0.0002, 0.0004};
  double noise_sigma = 0.05;
  double demand_scale = 40.0;  // mean of the base field
  int slot_min = 4;
  int slot_max = 16;
  double preexisting_fraction = 0.5;
  double max_load_fraction = 0.4;
  double cap_scs = 200.0;
  double cap_fcs = 400.0;
  // Adds multiplicative lognormal noise exp(s z - s^2 / 2) on top of the
  // model above, with s = mismatch_sigma.
  bool model_mismatch = false;
  double mismatch_sigma = 0.3;

  void validate() const {
    auto fail = [](const std::string& what) {
      throw InvalidArgument("synth config: " + what);
    };
    if (n_supply < 1) fail("n_supply must be positive");
    if (history_years < 1) fail("history_years must be positive");
    if (future_years < 0) fail("future_years must be nonnegative");
    SmoothingParam check(base_kappa);
    if (!(roughness >= 0.0) || !std::isfinite(roughness)) {
      fail("roughness must be nonnegative");
    }
    for (const Interval& iv : {trend_linear, trend_quadratic, trend_cubic}) {
      if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
        fail("trend ranges must be finite with lo <= hi");
      }
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
      fail("noise_sigma must be nonnegative");
    }
    if (!(demand_scale > 0.0) || !std::isfinite(demand_scale)) {
      fail("demand_scale must be positive");
    }
    if (slot_min < 0 || slot_min > slot_max) fail("slot range is empty");
    if (slot_max < 1) fail("slot range must allow at least one slot");
    if (!(preexisting_fraction >= 0.0 && preexisting_fraction <= 1.0)) {
      fail("preexisting_fraction must lie in [0, 1]");
    }
    if (!(max_load_fraction > 0.0 && max_load_fraction <= 1.0)) {
      fail("max_load_fraction must lie in (0, 1]");
    }
    if (!(cap_scs > 0.0) || !(cap_fcs > 0.0)) fail("capacities must be positive");
    if (!(mismatch_sigma >= 0.0) || !std::isfinite(mismatch_sigma)) {
      fail("mismatch_sigma must be nonnegative");
    }
  }
};

struct SynthInstance {
  DemandHistory history;
  InfrastructureState infrastructure;
  YearTable ground_truth;
};

// Portable variates on top of a standard engine.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi] by rejection.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return lo + static_cast<int>(v % span);
  }
  // Standard normal by Box-Muller; the second variate is kept.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {

// SplitMix64 finaliser; decorrelates the per-concern stream seeds.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t {
  kFieldStream = 0,
  kTrendStream = 1,
  kNoiseStream = 2,
  kSupplyStream = 3,
  kMismatchStream = 4,
};

}  // namespace detail

inline SynthInstance generate_instance(const SynthConfig& config) {
  config.validate();
  const GridSpec& grid = config.grid;
  const std::size_t n = grid.cell_count();
  const int years = config.history_years + config.future_years;

  // True spatial field.
  SynthRng field_rng(detail::stream_seed(config.seed, detail::kFieldStream));
  std::vector<double> rough(n);
  for (double& v : rough) {
    const double u = field_rng.uniform();
    v = config.roughness == 0.0 ? 1.0 : std::pow(u, config.roughness);
  }
  std::vector<double> field =
      smooth_demand(rough, grid, SmoothingParam(config.base_kappa));
  double mean = 0.0;
  for (double v : field) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : field) v = mean > 0.0 ? v * config.demand_scale / mean : 0.0;

  // Trends and noise, point-major over all years.
  SynthRng trend_rng(detail::stream_seed(config.seed, detail::kTrendStream));
  SynthRng noise_rng(detail::stream_seed(config.seed, detail::kNoiseStream));
  SynthRng mismatch_rng(
      detail::stream_seed(config.seed, detail::kMismatchStream));
  std::vector<double> all(n * years);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = trend_rng.uniform(config.trend_linear.lo,
                                       config.trend_linear.hi);
    const double b = trend_rng.uniform(config.trend_quadratic.lo,
                                       config.trend_quadratic.hi);
    const double c =
        trend_rng.uniform(config.trend_cubic.lo, config.trend_cubic.hi);
    for (int y = 0; y < years; ++y) {
      const double t = static_cast<double>(y);
      double v = field[i] * (1.0 + t * (a + t * (b + t * c)));
      if (y < config.history_years) {
        // Draws happen even at sigma 0 so the streams stay aligned.
        const double z = noise_rng.normal();
        v *= 1.0 + config.noise_sigma * z;
        const double w = mismatch_rng.normal();
        if (config.model_mismatch) {
          const double s = config.mismatch_sigma;
          v *= std::exp(s * w - 0.5 * s * s);
        }
      }
      all[i * years + y] = std::max(0.0, v);
    }
  }

  // Supply points.
  SynthRng supply_rng(detail::stream_seed(config.seed, detail::kSupplyStream));
  InfrastructureState infra;
  infra.baseline_year = config.first_year + config.history_years - 1;
  double slot_total = 0.0;
  for (int j = 0; j < config.n_supply; ++j) {
    SupplyPoint sp;
    sp.index = j;
    sp.x = std::round(supply_rng.uniform(0.0, grid.width() - 1) * 1000.0) /
           1000.0;
    sp.y = std::round(supply_rng.uniform(0.0, grid.height() - 1) * 1000.0) /
           1000.0;
    sp.parking_slots = supply_rng.uniform_int(config.slot_min, config.slot_max);
    slot_total += sp.parking_slots;
    infra.supply_points.push_back(sp);
  }

  // Keep the busiest year within the load budget.
  const double budget = config.max_load_fraction * slot_total * config.cap_fcs;
  double peak = 0.0;
  for (int y = 0; y < years; ++y) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += all[i * years + y];
    peak = std::max(peak, total);
  }
  if (peak > budget) {
    const double f = budget / peak;
    for (double& v : all) v *= f;
  }

  // Existing chargers sized from the final history year, each cell counted
  // at its nearest supply point (lowest index on ties).
  const std::size_t last = static_cast<std::size_t>(config.history_years - 1);
  std::vector<double> load(config.n_supply, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < infra.size(); ++j) {
      const SupplyPoint& sp = infra.supply_points[j];
      const double d = cell_distance(grid.col(i), grid.row(i), sp.x, sp.y);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    load[best] += all[i * years + last];
  }
  for (std::size_t j = 0; j < infra.size(); ++j) {
    SupplyPoint& sp = infra.supply_points[j];
    const double target = config.preexisting_fraction * load[j];
    const int fast = std::min(
        sp.parking_slots, static_cast<int>(std::floor(target / config.cap_fcs)));
    const double rest = target - fast * config.cap_fcs;
    const int slow =
        std::min(sp.parking_slots - fast,
                 static_cast<int>(std::ceil(std::max(0.0, rest) /
                                            config.cap_scs)));
    sp.existing_fcs = fast;
    sp.existing_scs = slow;
  }

  // Existing slow chargers keep their slots, so the buildable capacity can
  // fall below the all-fast figure used above. Scale again if needed.
  double buildable = 0.0;
  for (const SupplyPoint& sp : infra.supply_points) {
    buildable += config.cap_scs * sp.existing_scs +
                 config.cap_fcs * (sp.parking_slots - sp.existing_scs);
  }
  peak = std::min(peak, budget);
  if (peak > config.max_load_fraction * buildable) {
    const double f = config.max_load_fraction * buildable / peak;
    for (double& v : all) v *= f;
  }

  std::vector<int> hist_years(config.history_years);
  std::vector<double> hist(n * config.history_years);
  for (int y = 0; y < config.history_years; ++y) {
    hist_years[y] = config.first_year + y;
  }
  YearTable truth;
  truth.point_count = n;
  for (int y = 0; y < config.future_years; ++y) {
    truth.years.push_back(config.first_year + config.history_years + y);
  }
  truth.values.resize(n * config.future_years);
  for (std::size_t i = 0; i < n; ++i) {
    for (int y = 0; y < config.history_years; ++y) {
      hist[i * config.history_years + y] = all[i * years + y];
    }
    for (int y = 0; y < config.future_years; ++y) {
      truth.values[i * config.future_years + y] =
          all[i * years + config.history_years + y];
    }
  }
  return {DemandHistory(grid, std::move(hist_years), std::move(hist)),
          std::move(infra), std::move(truth)};
}

}  // namespace evplace

#endif  // EVPLACE_SYNTH_HPP_
