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

// Acceptance suite. Prints one "criterion N: PASS|FAIL" line per criterion,
// preceded by indented detail lines. Exit status is 0 only if every
// requested criterion passes.
//
//   acceptance_test                  run all criteria
//   acceptance_test --criterion 3    run one

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evplace/evplace.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace evplace {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

void Detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void Detail(const char* fmt, ...) {
  std::printf("  ");
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
}

struct Settings {
  double full_scale_time_limit = 600.0;
};

// ---------------------------------------------------------------------------
// Instance families
// ---------------------------------------------------------------------------

InfrastructureState InfraFrom(const oracle::TinyInstance& t) {
  InfrastructureState s;
  for (std::size_t j = 0; j < t.slots.size(); ++j) {
    s.supply_points.push_back({static_cast<int>(j), 0.0, 0.0, t.slots[j],
                               t.base_scs[j], t.base_fcs[j]});
  }
  return s;
}

std::shared_ptr<const DistanceMatrix> DistFrom(
    const std::vector<std::vector<double>>& d) {
  std::vector<double> flat;
  for (const auto& row : d) flat.insert(flat.end(), row.begin(), row.end());
  return std::make_shared<const DistanceMatrix>(d.size(), d[0].size(), flat);
}

// At most 3 supply points, 6 demand cells and 2 slots each; demands with two
// decimals so the brute force and the solver see the same numbers.
oracle::TinyInstance Tiny(std::mt19937_64& rng, CostParams* params) {
  oracle::TinyInstance t;
  const int m = 1 + static_cast<int>(rng() % 3);
  const int n = 1 + static_cast<int>(rng() % 6);
  t.dist.assign(n, std::vector<double>(m));
  for (auto& row : t.dist) {
    for (double& v : row) v = static_cast<double>(rng() % 2000) / 100.0;
  }
  for (int j = 0; j < m; ++j) {
    t.slots.push_back(static_cast<int>(rng() % 3));
    t.base_scs.push_back(0);
    t.base_fcs.push_back(0);
    if (t.slots[j] > 0 && rng() % 4 == 0) t.base_scs[j] = 1;
    if (t.slots[j] - t.base_scs[j] > 0 && rng() % 4 == 0) t.base_fcs[j] = 1;
  }
  double cap = 0.0;
  for (int j = 0; j < m; ++j) cap += 400.0 * t.slots[j] - 200.0 * t.base_scs[j];
  t.demand.resize(n);
  for (double& v : t.demand) {
    v = std::floor(static_cast<double>(rng() % 10000) / 10000.0 * cap / n *
                   100.0) /
        100.0;
  }
  t.r = 0.5 + static_cast<double>(rng() % 250) / 100.0;
  *params = CostParams{};
  params->r = t.r;
  return t;
}

struct SmallInstance {
  std::shared_ptr<const DistanceMatrix> dist;
  InfrastructureState infra;
  std::vector<std::vector<double>> demand;  // per target year
  std::vector<int> years;
};

// Synthetic instance on a small grid; demand is the generator's ground truth.
SmallInstance Small(std::uint64_t seed, int min_side, int max_side,
                    int max_supply, int future_years, double max_load = 0.9) {
  std::mt19937_64 rng(seed * 7919 + 13);
  SynthConfig c;
  c.seed = seed;
  const int w = min_side + static_cast<int>(rng() % (max_side - min_side + 1));
  const int h = min_side + static_cast<int>(rng() % (max_side - min_side + 1));
  c.grid = GridSpec(w, h);
  c.n_supply = 1 + static_cast<int>(rng() % max_supply);
  c.slot_min = 1;
  c.slot_max = 6;
  c.future_years = future_years;
  c.max_load_fraction =
      0.2 + (max_load - 0.2) * static_cast<double>(rng() % 1000) / 1000.0;
  c.preexisting_fraction = static_cast<double>(rng() % 1000) / 1000.0;
  const SynthInstance inst = generate_instance(c);
  SmallInstance out;
  out.dist = std::make_shared<const DistanceMatrix>(
      distance_matrix(c.grid, inst.infrastructure));
  out.infra = inst.infrastructure;
  out.years = inst.ground_truth.years;
  for (std::size_t y = 0; y < inst.ground_truth.years.size(); ++y) {
    out.demand.push_back(inst.ground_truth.year_slice(y));
  }
  return out;
}

// Random counts inside [baseline, slots], then topped up until the capacity
// covers demand.
std::pair<std::vector<int>, std::vector<int>> RandomFeasibleCounts(
    const PlacementModel& model, std::mt19937_64& rng) {
  const std::size_t m = model.supply_count();
  std::vector<int> s(m), f(m);
  for (std::size_t j = 0; j < m; ++j) {
    const int free = model.slots()[j] - model.base_scs()[j] - model.base_fcs()[j];
    const int add = free > 0 ? static_cast<int>(rng() % (free + 1)) : 0;
    const int to_fast = add > 0 ? static_cast<int>(rng() % (add + 1)) : 0;
    s[j] = model.base_scs()[j] + add - to_fast;
    f[j] = model.base_fcs()[j] + to_fast;
  }
  const CostParams& p = model.params();
  auto capacity = [&] {
    double c = 0.0;
    for (std::size_t j = 0; j < m; ++j) c += p.cap_scs * s[j] + p.cap_fcs * f[j];
    return c;
  };
  while (capacity() < model.total_demand()) {
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < m; ++j) {
      if (s[j] + f[j] < model.slots()[j] || s[j] > model.base_scs()[j]) {
        open.push_back(j);
      }
    }
    const std::size_t j = open[rng() % open.size()];
    if (s[j] + f[j] < model.slots()[j]) {
      ++f[j];
    } else {
      --s[j];  // swap a slow charger for a fast one
      ++f[j];
    }
  }
  return {s, f};
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

bool Criterion1(const Settings& settings) {
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig c;
    c.seed = seed;
    const SynthInstance inst = generate_instance(c);
    const DemandForecast f = forecast_demand(
        inst.history, SmoothingParam(4.7), {inst.history.last_year() + 1});
    const PlacementModel model =
        build_model(c.grid, f.year_slice(0), inst.infrastructure, CostParams{});
    double cap = 0.0;
    for (std::size_t j = 0; j < model.supply_count(); ++j) {
      cap += model.max_capacity(j);
    }
    MipOptions o;
    o.gap_tol = 1e-4;
    o.time_limit_seconds = settings.full_scale_time_limit;
    o.deterministic = true;
    const PlacementSolution s = solve_mip(model, o);
    const bool pass =
        s.gap <= 1e-4 && s.wall_time.count() <= settings.full_scale_time_limit;
    ok = ok && pass;
    Detail("seed %2llu: load %.3f of capacity, Z=%.2f LB=%.2f gap=%.3e "
           "nodes=%lld time=%.1fs %s",
           static_cast<unsigned long long>(seed), model.total_demand() / cap,
           s.objective, s.lower_bound, s.gap,
           static_cast<long long>(s.node_count), s.wall_time.count(),
           pass ? "ok" : "miss");
  }
  return ok;
}

bool Criterion2() {
  std::mt19937_64 rng(20240521);
  const auto start = Clock::now();
  int mismatches = 0;
  double worst = 0.0;
  MipOptions o;
  o.gap_tol = 1e-10;
  for (int trial = 0; trial < 200; ++trial) {
    CostParams p;
    const oracle::TinyInstance t = Tiny(rng, &p);
    const PlacementModel model =
        build_model(DistFrom(t.dist), t.demand, InfraFrom(t), p);
    const PlacementSolution s = solve_mip(model, o);
    const oracle::BruteForceResult bf = oracle::brute_force_placement(t);
    const double rel =
        std::abs(s.objective - bf.objective) / std::max(1.0, std::abs(bf.objective));
    worst = std::max(worst, rel);
    if (rel > 1e-8) {
      ++mismatches;
      Detail("trial %d: solver %.10f brute force %.10f", trial, s.objective,
             bf.objective);
    }
  }
  const double secs = Seconds(start);
  Detail("200 instances, %d mismatches, worst relative error %.2e, %.2fs total",
         mismatches, worst, secs);
  return mismatches == 0 && secs < 10.0;
}

struct BoundCheck {
  int instances = 0;
  int roundings = 0;
  int violations = 0;
  SolveStats stats;
  int transport_certificates = 0;
  int transport_failures = 0;
};

// Shared by criteria 3 and 4.
BoundCheck RunBoundInstances(bool verify) {
  BoundCheck out;
  std::mt19937_64 rng(777);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const SmallInstance inst = Small(1000 + k, 3, 9, 6, 1);
    const PlacementModel model =
        build_model(inst.dist, inst.demand[0], inst.infra, CostParams{});
    const LpRelaxation lp = solve_lp_relaxation(model);
    MipOptions o;
    o.gap_tol = 1e-6;
    o.time_limit_seconds = 30.0;
    o.verify_certificates = verify;
    const PlacementSolution s = solve_mip(model, o);
    detail::merge_stats(&out.stats, s.stats);
    if (verify) {
      ++out.transport_certificates;
      if (lp.certificate.violations > 0) ++out.transport_failures;
    }
    ++out.instances;
    const double lb = std::max(lp.lower_bound, s.lower_bound);
    for (int r = 0; r < 20; ++r) {
      const auto [sc, fc] = RandomFeasibleCounts(model, rng);
      const TransportationResult t = solve_transportation(model, sc, fc);
      const double z = t.transport_cost +
                       infrastructure_cost(sc, fc, model.params().gamma,
                                           model.params().r);
      ++out.roundings;
      if (verify) {
        ++out.transport_certificates;
        if (t.certificate.violations > 0) ++out.transport_failures;
      }
      if (lb > z + 1e-9 * std::abs(z)) {
        ++out.violations;
        Detail("instance %llu: bound %.9f above rounding %.9f",
               static_cast<unsigned long long>(k), lb, z);
      }
    }
    if (s.lower_bound > s.objective + 1e-9 * std::abs(s.objective)) {
      ++out.violations;
    }
  }
  return out;
}

bool Criterion3() {
  const BoundCheck b = RunBoundInstances(false);
  Detail("%d instances, %d roundings, %d bound violations", b.instances,
         b.roundings, b.violations);
  return b.violations == 0 && b.instances == 100;
}

bool Criterion4() {
  const BoundCheck b = RunBoundInstances(true);
  SolveStats tiny;
  std::mt19937_64 rng(20240521);
  MipOptions o;
  o.gap_tol = 1e-10;
  o.verify_certificates = true;
  for (int trial = 0; trial < 200; ++trial) {
    CostParams p;
    const oracle::TinyInstance t = Tiny(rng, &p);
    const PlacementModel model =
        build_model(DistFrom(t.dist), t.demand, InfraFrom(t), p);
    detail::merge_stats(&tiny, solve_mip(model, o).stats);
  }
  for (std::uint64_t k = 0; k < 30; ++k) {
    const SmallInstance inst = Small(5000 + k, 3, 8, 5, 2);
    MipOptions mo;
    mo.verify_certificates = true;
    for (const PlacementSolution& s : solve_multi_year(
             inst.dist, inst.demand, inst.infra, CostParams{}, mo, inst.years)) {
      detail::merge_stats(&tiny, s.stats);
    }
  }
  const long long checks = b.stats.certificate_checks + tiny.certificate_checks +
                           b.transport_certificates;
  const long long solves = b.stats.flow_solves + tiny.flow_solves +
                           b.transport_certificates;
  const long long failures = b.stats.certificate_failures +
                             tiny.certificate_failures + b.transport_failures;
  const double worst =
      std::min(b.stats.worst_reduced_cost, tiny.worst_reduced_cost);
  Detail("%lld flow solves, %lld certificates checked, %lld failures, most "
         "negative reduced cost %.3e",
         solves, checks, failures, worst);
  return failures == 0 && checks == solves && checks > 0;
}

bool Criterion5() {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> val(0.0, 1000.0);
  std::uniform_real_distribution<double> kap(0.0, 20.0);
  double worst_mean = 0.0, worst_id = 0.0;
  int bound_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const GridSpec g(1 + static_cast<int>(rng() % 12),
                     1 + static_cast<int>(rng() % 12));
    std::vector<double> v(g.cell_count());
    for (double& x : v) x = (rng() % 5 == 0) ? 0.0 : val(rng);
    if (trial < 100) {
      // Fields with a few huge outliers stress the mean.
      v[rng() % v.size()] = 1e6;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    for (double s : smooth_demand(v, g, SmoothingParam(0.0))) {
      if (mean > 0) worst_mean = std::max(worst_mean, std::abs(s - mean) / mean);
    }
    const auto id = smooth_demand(v, g, SmoothingParam(1e6));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double err = std::abs(id[i] - v[i]);
      worst_id = std::max(worst_id, v[i] > 0 ? err / v[i] : err);
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    for (double s : smooth_demand(v, g, SmoothingParam(kap(rng)))) {
      if (s < *lo * (1 - 1e-15) || s > *hi * (1 + 1e-15)) ++bound_failures;
    }
  }
  Detail("kappa=0 worst relative error %.2e (limit 1e-12)", worst_mean);
  Detail("kappa=1e6 worst relative error %.2e (limit 1e-9)", worst_id);
  Detail("convex bound failures over 1000 fields: %d", bound_failures);
  return worst_mean <= 1e-12 && worst_id <= 1e-9 && bound_failures == 0;
}

bool Criterion6() {
  const double truths[4] = {1.0, 3.0, 5.0, 8.0};
  const std::vector<double> grid = default_kappa_grid();
  int hits = 0;
  for (int k = 0; k < 20; ++k) {
    SynthConfig c;
    c.seed = 600 + k;
    c.grid = GridSpec(32, 32);
    c.n_supply = 5;
    c.base_kappa = truths[k % 4];
    c.noise_sigma = 0.01;
    const SynthInstance inst = generate_instance(c);
    const KappaSearchResult r = tune_kappa(inst.history, grid);
    const bool hit = std::abs(r.best.kappa() - c.base_kappa) <= 0.5 + 1e-9;
    hits += hit;
    Detail("instance %2d: true kappa %.1f, tuned %.1f %s", k, c.base_kappa,
           r.best.kappa(), hit ? "ok" : "miss");
  }
  Detail("%d of 20 within 0.5 (need 18)", hits);
  return hits >= 18;
}

bool Criterion7() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const PolyCoeffs truth{coef(rng), coef(rng), coef(rng), coef(rng)};
    std::vector<int> years;
    for (int y = 2000; y < 2016; ++y) years.push_back(y);
    std::shuffle(years.begin(), years.end(), rng);
    years.resize(4 + rng() % 10);
    std::sort(years.begin(), years.end());
    std::vector<std::pair<int, double>> s;
    for (int y : years) s.emplace_back(y, truth(y - years.front()));
    const PolyCoeffs f = fit_cubic(s);
    worst = std::max({worst, std::abs(f.c0 - truth.c0), std::abs(f.c1 - truth.c1),
                      std::abs(f.c2 - truth.c2), std::abs(f.c3 - truth.c3)});
  }
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> t, v;
  std::vector<std::pair<int, double>> series;
  for (int k = 0; k < 8; ++k) {
    t.push_back(k);
    v.push_back(5.0 + 0.5 * k + 0.1 * k * k + noise(rng));
    series.emplace_back(2010 + k, v.back());
  }
  const PolyCoeffs f = fit_cubic(series);
  const auto o = oracle::cubic_normal_equations(t, v);
  const double noisy = std::max({std::abs(f.c0 - o[0]), std::abs(f.c1 - o[1]),
                                 std::abs(f.c2 - o[2]), std::abs(f.c3 - o[3])});
  Detail("exact cubics: worst coefficient error %.2e (limit 1e-9)", worst);
  Detail("noisy 8-point fit vs normal equations: %.2e (limit 1e-6)", noisy);
  return worst <= 1e-9 && noisy <= 1e-6;
}

bool HasViolation(const ValidationReport& rep, int id, double magnitude) {
  for (const Violation& v : rep.violations) {
    if (v.constraint == id &&
        std::abs(v.magnitude - magnitude) <= 1e-9 * std::max(1.0, magnitude)) {
      return true;
    }
  }
  return false;
}

bool Criterion8() {
  std::mt19937_64 rng(88);
  int failed_validation = 0;
  int injected[7] = {0}, caught[7] = {0};
  for (std::uint64_t k = 0; k < 500; ++k) {
    const SmallInstance inst = Small(8000 + k, 2, 8, 6, 1);
    const PlacementModel model =
        build_model(inst.dist, inst.demand[0], inst.infra, CostParams{});
    MipOptions o;
    o.time_limit_seconds = 30.0;
    const PlacementSolution sol = solve_mip(model, o);
    if (!validate_solution(model, sol).passed) {
      ++failed_validation;
      continue;
    }
    const std::size_t m = model.supply_count();
    auto check = [&](int id, const std::vector<int>& s, const std::vector<int>& f,
                     const Assignment& x, double mag) {
      ++injected[id];
      if (HasViolation(validate_solution(model, s, f, x), id, mag)) ++caught[id];
    };
    const Assignment& x = sol.assignment;
    const std::size_t j = rng() % m;
    // 1: a negative flow balanced by an equal extra flow on the same arc.
    if (!x.empty()) {
      Assignment y = x;
      const AssignmentEntry e = y[rng() % y.size()];
      y.push_back({e.demand, e.supply, 0.75});
      y.push_back({e.demand, e.supply, -0.75});
      check(1, sol.n_scs, sol.n_fcs, y, 0.75);
    }
    // 2: negative count.
    {
      std::vector<int> s = sol.n_scs;
      s[j] = -2;
      check(2, s, sol.n_fcs, x, 2.0);
    }
    // 3: one charger too many.
    {
      std::vector<int> s = sol.n_scs;
      s[j] += model.slots()[j] - sol.n_scs[j] - sol.n_fcs[j] + 1;
      check(3, s, sol.n_fcs, x, 1.0);
    }
    // 4: below the baseline.
    for (std::size_t q = 0; q < m; ++q) {
      if (model.base_fcs()[q] > 0) {
        std::vector<int> f = sol.n_fcs;
        f[q] = model.base_fcs()[q] - 1;
        check(4, sol.n_scs, f, x, 1.0);
        break;
      }
    }
    // 5: remove a non-baseline charger under load.
    {
      std::vector<double> load(m, 0.0);
      for (const auto& e : x) load[e.supply] += e.amount;
      for (std::size_t q = 0; q < m; ++q) {
        const double cap = 200.0 * sol.n_scs[q] + 400.0 * sol.n_fcs[q];
        if (sol.n_fcs[q] > model.base_fcs()[q] && load[q] > cap - 400.0 + 1e-3) {
          std::vector<int> f = sol.n_fcs;
          --f[q];
          check(5, sol.n_scs, f, x, load[q] - (cap - 400.0));
          break;
        }
      }
    }
    // 6: under-serve one cell.
    if (!x.empty()) {
      Assignment y = x;
      AssignmentEntry& e = y[rng() % y.size()];
      const double cut = e.amount / 2;
      e.amount -= cut;
      double served = 0.0;
      for (const auto& a : y) {
        if (a.demand == e.demand) served += a.amount;
      }
      const double mag = std::abs(served - model.demand()[e.demand]);
      if (cut > 1e-3) check(6, sol.n_scs, sol.n_fcs, y, mag);
    }
  }
  Detail("500 optimizer outputs, %d failed validation", failed_validation);
  bool ok = failed_validation == 0;
  for (int id = 1; id <= 6; ++id) {
    Detail("constraint %d: injected %d, flagged with correct magnitude %d", id,
           injected[id], caught[id]);
    ok = ok && injected[id] > 0 && caught[id] == injected[id];
  }
  return ok;
}

bool Criterion9() {
  int violations = 0;
  int instances = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    // Load at most half the buildable capacity: even if every slot ends the
    // first year holding a slow charger, the second year stays feasible.
    const SmallInstance inst = Small(9000 + k, 3, 10, 6, 2, 0.5);
    MipOptions o;
    o.time_limit_seconds = 30.0;
    const auto sols =
        solve_multi_year(inst.dist, inst.demand, inst.infra, CostParams{}, o,
                         inst.years);
    ++instances;
    for (std::size_t j = 0; j < inst.infra.size(); ++j) {
      const SupplyPoint& sp = inst.infra.supply_points[j];
      if (sols[0].n_scs[j] < sp.existing_scs || sols[0].n_fcs[j] < sp.existing_fcs ||
          sols[1].n_scs[j] < sols[0].n_scs[j] || sols[1].n_fcs[j] < sols[0].n_fcs[j]) {
        ++violations;
      }
    }
  }
  Detail("%d two-year instances, %d monotonicity violations", instances,
         violations);
  return violations == 0 && instances == 100;
}

int RunCli(const std::string& args) {
  const std::string cmd =
      std::string(EVPLACE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool Criterion10() {
  const fs::path root = fs::temp_directory_path() /
                        ("evplace_acceptance_" + std::to_string(getpid()));
  fs::remove_all(root);
  const std::string common = " --deterministic --seed 7 -o ";
  const char* steps[] = {"generate --grid 16 --supply 12", "forecast",
                         "optimize", "evaluate", "heatmap --mark-supply"};
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const std::string dir = (root / run).string();
    for (const char* step : steps) {
      const int code = RunCli(std::string(step) + common + dir);
      if (code != 0) {
        Detail("run %s: '%s' exited %d", run, step, code);
        ok = false;
      }
    }
  }
  int files = 0, differing = 0;
  if (ok) {
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(root / "a")) {
      names.push_back(e.path().filename());
    }
    std::sort(names.begin(), names.end());
    for (const fs::path& name : names) {
      ++files;
      if (!fs::exists(root / "b" / name) ||
          Slurp(root / "a" / name) != Slurp(root / "b" / name)) {
        ++differing;
        Detail("%s differs", name.string().c_str());
      }
    }
    Detail("%d artifacts compared, %d differ", files, differing);
  }
  fs::remove_all(root);
  return ok && files == 9 && differing == 0;
}

}  // namespace
}  // namespace evplace

int main(int argc, char** argv) {
  CLI::App app{"evplace acceptance suite"};
  int only = 0;
  evplace::Settings settings;
  app.add_option("--criterion", only, "Run a single criterion (1-10)")
      ->check(CLI::Range(1, 10));
  app.add_option("--full-scale-time-limit", settings.full_scale_time_limit,
                 "Per-year time limit for criterion 1 (seconds)")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<bool()>>> criteria = {
      {"optimality gap at full scale",
       [&] { return evplace::Criterion1(settings); }},
      {"exactness on small instances", evplace::Criterion2},
      {"lower bound validity", evplace::Criterion3},
      {"transportation optimality certificates", evplace::Criterion4},
      {"smoothing limits", evplace::Criterion5},
      {"kappa recovery", evplace::Criterion6},
      {"cubic-fit exactness", evplace::Criterion7},
      {"constraint validation", evplace::Criterion8},
      {"multi-year monotonicity", evplace::Criterion9},
      {"end-to-end determinism", evplace::Criterion10},
  };
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (only != 0 && only != id) continue;
    const auto start = evplace::Clock::now();
    bool pass = false;
    try {
      pass = criteria[k].second();
    } catch (const std::exception& e) {
      evplace::Detail("exception: %s", e.what());
    }
    std::printf("criterion %d: %s (%s, %.1fs)\n", id, pass ? "PASS" : "FAIL",
                criteria[k].first, evplace::Seconds(start));
    std::fflush(stdout);
    all = all && pass;
  }
  return all ? 0 : 1;
}
