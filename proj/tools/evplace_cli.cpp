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

// evplace: generate -> forecast -> optimize -> evaluate -> heatmap.
//
// Exit codes: 0 success, 1 domain failure (bad data, infeasible instance,
// failed validation, I/O), 2 usage error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evplace/evplace.hpp"

namespace fs = std::filesystem;

namespace evplace {
namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

constexpr char kHistoryFile[] = "demand_history.csv";
constexpr char kInfraFile[] = "infrastructure.csv";
constexpr char kTruthFile[] = "ground_truth.csv";
constexpr char kForecastFile[] = "forecast.csv";
constexpr char kMetaFile[] = "forecast_meta.txt";
constexpr char kSolutionFile[] = "solution.csv";
constexpr char kAssignmentFile[] = "assignment.csv";
constexpr char kScoreFile[] = "score.csv";
constexpr char kHeatmapFile[] = "heatmap.pgm";

struct GlobalOptions {
  std::string output_dir = ".";
  std::string input_dir;  // defaults to output_dir
  int threads = 1;
  bool deterministic = false;
  std::uint64_t seed = 42;

  fs::path in(const std::string& name) const {
    return fs::path(input_dir.empty() ? output_dir : input_dir) / name;
  }
  fs::path out(const std::string& name) const {
    return fs::path(output_dir) / name;
  }
};

struct CostOptions {
  CostParams params;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--alpha", params.alpha, "Weight of distance cost")
        ->capture_default_str();
    cmd->add_option("--beta", params.beta, "Weight of demand mismatch")
        ->capture_default_str();
    cmd->add_option("--gamma", params.gamma, "Price of a slow charger")
        ->capture_default_str();
    cmd->add_option("--price-ratio", params.r,
                    "Price of a fast charger relative to a slow one")
        ->capture_default_str();
    cmd->add_option("--cap-scs", params.cap_scs, "Slow charger capacity")
        ->capture_default_str();
    cmd->add_option("--cap-fcs", params.cap_fcs, "Fast charger capacity")
        ->capture_default_str();
  }
};

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

template <typename WriteFn>
void write_file(const fs::path& p, WriteFn&& fn) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) {
      throw Error("cannot create " + p.parent_path().string() + ": " +
                  ec.message());
    }
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  fn(out);
  out.flush();
  if (!out) throw Error("write failed for " + p.string());
}

template <typename T, typename ParseFn>
T read_file(const fs::path& p, ParseFn&& fn) {
  std::ifstream in = open_in(p);
  try {
    return fn(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), p.filename().string() + ": " + e.cause());
  }
}

// "lo:step:hi" or a comma-separated list.
std::vector<double> parse_kappa_grid(const std::string& spec) {
  std::vector<double> grid;
  try {
    if (spec.find(':') != std::string::npos) {
      const auto parts = csv::split(spec, ':');
      if (parts.size() != 3) throw CLI::ValidationError("--kappa-grid", spec);
      const double lo = csv::parse_double(parts[0], 0, "kappa grid start");
      const double step = csv::parse_double(parts[1], 0, "kappa grid step");
      const double hi = csv::parse_double(parts[2], 0, "kappa grid end");
      if (!(step > 0.0) || hi < lo) {
        throw CLI::ValidationError("--kappa-grid", "empty range " + spec);
      }
      const long count = std::lround(std::floor((hi - lo) / step + 1e-9)) + 1;
      for (long k = 0; k < count; ++k) {
        // Snap to 12 decimals so 0:0.1:10 yields 6.1, not 6.1000000000000005.
        grid.push_back(std::round((lo + k * step) * 1e12) / 1e12);
      }
    } else {
      for (auto f : csv::split(spec, ',')) {
        grid.push_back(csv::parse_double(f, 0, "kappa"));
      }
    }
  } catch (const ParseError& e) {
    throw CLI::ValidationError("--kappa-grid", e.what());
  }
  for (double k : grid) {
    if (!std::isfinite(k) || k < 0.0) {
      throw CLI::ValidationError("--kappa-grid", "kappa must be nonnegative");
    }
  }
  return grid;
}

GridSpec grid_from_meta(const GlobalOptions& g) {
  const ForecastMeta meta =
      read_file<ForecastMeta>(g.in(kMetaFile), parse_forecast_meta);
  return GridSpec(meta.grid_width, meta.grid_height);
}

// ---------------------------------------------------------------------------

struct GenerateOptions {
  int grid = 64;
  int height = 0;
  int supply = 100;
  int history_years = 9;
  int future_years = 2;
  int first_year = 2010;
  double kappa = 4.7;
  double noise = 0.05;
  double roughness = 3.0;
  double demand_scale = 40.0;
  double load_fraction = 0.4;
  double preexisting = 0.5;
  bool mismatch = false;
  double mismatch_sigma = 0.3;
};

int cmd_generate(const GlobalOptions& g, const GenerateOptions& o) {
  SynthConfig c;
  c.seed = g.seed;
  c.grid = GridSpec(o.grid, o.height > 0 ? o.height : o.grid);
  c.n_supply = o.supply;
  c.first_year = o.first_year;
  c.history_years = o.history_years;
  c.future_years = o.future_years;
  c.base_kappa = o.kappa;
  c.noise_sigma = o.noise;
  c.roughness = o.roughness;
  c.demand_scale = o.demand_scale;
  c.max_load_fraction = o.load_fraction;
  c.preexisting_fraction = o.preexisting;
  c.model_mismatch = o.mismatch;
  c.mismatch_sigma = o.mismatch_sigma;
  const SynthInstance inst = generate_instance(c);
  write_file(g.out(kHistoryFile),
             [&](std::ostream& out) { write_demand_history(out, inst.history); });
  write_file(g.out(kInfraFile), [&](std::ostream& out) {
    write_infrastructure(out, inst.infrastructure);
  });
  write_file(g.out(kTruthFile),
             [&](std::ostream& out) { write_year_table(out, inst.ground_truth); });
  std::cout << "generated " << c.grid.width() << "x" << c.grid.height()
            << " grid, " << c.n_supply << " supply points, history "
            << inst.history.first_year() << "-" << inst.history.last_year()
            << ", ground truth for " << inst.ground_truth.years.size()
            << " years\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ForecastOptions {
  std::optional<double> kappa;
  std::string kappa_grid = "0:0.1:10";
  int years = 2;
  std::vector<int> target_years;
  std::string history;
};

int cmd_forecast(const GlobalOptions& g, const ForecastOptions& o) {
  const std::vector<double> grid =
      o.kappa ? std::vector<double>{*o.kappa} : parse_kappa_grid(o.kappa_grid);
  const fs::path hist_path = o.history.empty() ? g.in(kHistoryFile)
                                               : fs::path(o.history);
  const DemandHistory history =
      read_file<DemandHistory>(hist_path, [](std::istream& in) {
        return parse_demand_history(in);
      });
  std::vector<int> targets = o.target_years;
  if (targets.empty()) {
    for (int k = 1; k <= o.years; ++k) targets.push_back(history.last_year() + k);
  }
  const SmoothingParam kappa = o.kappa ? SmoothingParam(*o.kappa)
                                       : tune_kappa(history, grid, g.threads).best;
  DemandForecast f = forecast_demand(history, kappa, targets);
  f.kappa_grid = grid;
  ForecastMeta meta;
  meta.grid_width = history.grid().width();
  meta.grid_height = history.grid().height();
  meta.kappa_used = f.kappa_used;
  meta.holdout_mse = f.holdout_mse;
  meta.kappa_grid = grid;
  meta.history_first_year = history.first_year();
  meta.history_last_year = history.last_year();
  write_file(g.out(kForecastFile),
             [&](std::ostream& out) { write_year_table(out, to_year_table(f)); });
  write_file(g.out(kMetaFile),
             [&](std::ostream& out) { write_forecast_meta(out, meta); });
  std::cout << "kappa=" << csv::format_double(f.kappa_used) << " holdout_mse="
            << (std::isfinite(f.holdout_mse) ? csv::format_double(f.holdout_mse)
                                             : std::string("nan"))
            << " targets=";
  for (std::size_t t = 0; t < targets.size(); ++t) {
    std::cout << (t ? "," : "") << targets[t];
  }
  std::cout << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct OptimizeOptions {
  CostOptions costs;
  double gap_tol = 1e-4;
  double time_limit = 600.0;
};

int cmd_optimize(const GlobalOptions& g, const OptimizeOptions& o) {
  const GridSpec grid = grid_from_meta(g);
  const YearTable forecast =
      read_file<YearTable>(g.in(kForecastFile), parse_year_table);
  const InfrastructureState infra =
      read_file<InfrastructureState>(g.in(kInfraFile), [](std::istream& in) {
        return parse_infrastructure(in);
      });
  if (forecast.point_count != grid.cell_count()) {
    throw InvalidArgument("forecast has " +
                          std::to_string(forecast.point_count) +
                          " demand points, grid has " +
                          std::to_string(grid.cell_count()));
  }
  auto dist = std::make_shared<const DistanceMatrix>(distance_matrix(grid, infra));
  std::vector<std::vector<double>> demand;
  for (std::size_t y = 0; y < forecast.years.size(); ++y) {
    demand.push_back(forecast.year_slice(y));
  }
  MipOptions mip;
  mip.gap_tol = o.gap_tol;
  mip.time_limit_seconds = o.time_limit;
  mip.deterministic = g.deterministic;
  mip.threads = g.threads;
  const auto solutions = solve_multi_year(dist, demand, infra, o.costs.params,
                                          mip, forecast.years);
  std::vector<YearPlacement> placements;
  for (std::size_t y = 0; y < solutions.size(); ++y) {
    const PlacementSolution& s = solutions[y];
    placements.push_back({forecast.years[y], s.n_scs, s.n_fcs, s.assignment});
    std::printf("year %d: Z=%.6f lower_bound=%.6f gap=%.3e nodes=%lld "
                "time=%.2fs\n",
                forecast.years[y], s.objective, s.lower_bound, s.gap,
                static_cast<long long>(s.node_count), s.wall_time.count());
  }
  std::fflush(stdout);
  write_file(g.out(kSolutionFile),
             [&](std::ostream& out) { write_solution_csv(out, placements); });
  write_file(g.out(kAssignmentFile),
             [&](std::ostream& out) { write_assignment_csv(out, placements); });
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateOptions {
  CostOptions costs;
  std::string ground_truth;
  bool no_ground_truth = false;
};

int cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o) {
  const GridSpec grid = grid_from_meta(g);
  const YearTable forecast =
      read_file<YearTable>(g.in(kForecastFile), parse_year_table);
  const InfrastructureState infra =
      read_file<InfrastructureState>(g.in(kInfraFile), [](std::istream& in) {
        return parse_infrastructure(in);
      });
  std::vector<YearPlacement> placements;
  {
    std::ifstream sol = open_in(g.in(kSolutionFile));
    std::ifstream asg = open_in(g.in(kAssignmentFile));
    placements = parse_placements(sol, asg);
  }
  std::optional<YearTable> truth;
  if (!o.no_ground_truth) {
    const fs::path p =
        o.ground_truth.empty() ? g.in(kTruthFile) : fs::path(o.ground_truth);
    if (!o.ground_truth.empty() || fs::exists(p)) {
      truth = read_file<YearTable>(p, parse_year_table);
    }
  }
  if (forecast.point_count != grid.cell_count()) {
    throw InvalidArgument("forecast does not match the grid");
  }
  auto dist = std::make_shared<const DistanceMatrix>(distance_matrix(grid, infra));

  InfrastructureState state = infra;
  std::vector<std::pair<int, CostBreakdown>> rows;
  bool all_passed = true;
  for (const YearPlacement& p : placements) {
    const int fy = forecast.find_year(p.year);
    if (fy < 0) {
      throw InvalidArgument("solution year " + std::to_string(p.year) +
                            " is not in the forecast");
    }
    if (p.n_scs.size() != infra.size()) {
      throw InvalidArgument("year " + std::to_string(p.year) + ": solution has " +
                            std::to_string(p.n_scs.size()) +
                            " supply points, infrastructure has " +
                            std::to_string(infra.size()));
    }
    // Baselines may already be broken by a corrupted earlier year; the model
    // only needs them for the constraint check below.
    std::vector<int> slots(infra.size()), base_s(infra.size()),
        base_f(infra.size());
    for (std::size_t j = 0; j < infra.size(); ++j) {
      slots[j] = infra.supply_points[j].parking_slots;
      base_s[j] = state.supply_points[j].existing_scs;
      base_f[j] = state.supply_points[j].existing_fcs;
    }
    const PlacementModel model(dist, forecast.year_slice(fy), slots, base_s,
                               base_f, o.costs.params);
    const ValidationReport rep = validate_solution(model, p.n_scs, p.n_fcs,
                                                   p.assignment);
    if (!rep.passed) {
      all_passed = false;
      for (const Violation& v : rep.violations) {
        std::cout << "year " << p.year << ": violation of constraint "
                  << v.constraint << " at " << v.location << " (magnitude "
                  << csv::format_double(v.magnitude) << ")\n";
      }
    }
    std::optional<std::vector<double>> actual;
    if (truth) {
      const int ty = truth->find_year(p.year);
      if (ty >= 0) {
        if (truth->point_count != grid.cell_count()) {
          throw InvalidArgument("ground truth does not match the grid");
        }
        actual = truth->year_slice(ty);
      }
    }
    const CostBreakdown b =
        actual ? total_score(model, p.n_scs, p.n_fcs, p.assignment,
                             std::span<const double>(*actual))
               : total_score(model, p.n_scs, p.n_fcs, p.assignment);
    rows.emplace_back(p.year, b);
    std::cout << "year " << p.year << ": valid=" << (rep.passed ? "yes" : "no")
              << " cd=" << csv::format_double(b.customer_dissatisfaction)
              << " dm="
              << (b.mismatch_available ? csv::format_double(b.demand_mismatch)
                                       : std::string("n/a"))
              << " infrastructure=" << csv::format_double(b.infrastructure)
              << " total=" << csv::format_double(b.total) << '\n';
    for (std::size_t j = 0; j < state.size(); ++j) {
      state.supply_points[j].existing_scs = p.n_scs[j];
      state.supply_points[j].existing_fcs = p.n_fcs[j];
    }
  }
  write_file(g.out(kScoreFile),
             [&](std::ostream& out) { write_score_csv(out, rows); });
  if (!all_passed) {
    std::cerr << "error: solution failed validation\n";
    return kExitDomain;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct HeatmapOptions {
  std::string input;
  std::optional<int> year;
  bool mark_supply = false;
  std::string output = kHeatmapFile;
};

int cmd_heatmap(const GlobalOptions& g, const HeatmapOptions& o) {
  const fs::path src = o.input.empty() ? g.in(kHistoryFile) : fs::path(o.input);
  std::string header;
  {
    std::ifstream in = open_in(src);
    std::getline(in, header);
  }
  GridSpec grid(1, 1);
  std::vector<double> values;
  int year = 0;
  if (header.rfind("demand_point_index,x,y", 0) == 0) {
    const DemandHistory h =
        read_file<DemandHistory>(src, [](std::istream& in) {
          return parse_demand_history(in);
        });
    grid = h.grid();
    year = o.year.value_or(h.last_year());
    if (year < h.first_year() || year > h.last_year()) {
      throw InvalidArgument("year " + std::to_string(year) +
                            " is not in the history");
    }
    values = h.year_slice(static_cast<std::size_t>(year - h.first_year()));
  } else {
    const YearTable t = read_file<YearTable>(src, parse_year_table);
    grid = grid_from_meta(g);
    if (t.years.empty()) throw InvalidArgument("no years in " + src.string());
    year = o.year.value_or(t.years.front());
    const int y = t.find_year(year);
    if (y < 0) {
      throw InvalidArgument("year " + std::to_string(year) + " is not in " +
                            src.filename().string());
    }
    if (t.point_count != grid.cell_count()) {
      throw InvalidArgument(src.filename().string() +
                            " does not match the grid");
    }
    values = t.year_slice(static_cast<std::size_t>(y));
  }
  std::vector<SupplyPoint> marks;
  if (o.mark_supply) {
    marks = read_file<InfrastructureState>(g.in(kInfraFile),
                                           [](std::istream& in) {
                                             return parse_infrastructure(in);
                                           })
                .supply_points;
  }
  const fs::path out_path = fs::path(o.output).is_absolute()
                                ? fs::path(o.output)
                                : g.out(o.output);
  write_file(out_path,
             [&](std::ostream& out) { write_pgm(out, values, grid, marks); });
  std::cout << "wrote " << out_path.string() << " (" << grid.width() << "x"
            << grid.height() << ", year " << year << ")\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"EV charging demand forecasting and charger placement"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("-o,--output-dir", g.output_dir, "Directory for outputs")
      ->capture_default_str();
  app.add_option("-i,--input-dir", g.input_dir,
                 "Directory for inputs (defaults to the output directory)");
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--deterministic", g.deterministic,
               "Bit-reproducible runs (single search worker)");
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "Synthesize a dataset");
  generate->add_option("--grid", gen.grid, "Grid width (and height)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  generate->add_option("--height", gen.height, "Grid height if not square")
      ->check(CLI::PositiveNumber);
  generate->add_option("--supply", gen.supply, "Number of supply points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  generate->add_option("--history-years", gen.history_years)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  generate->add_option("--future-years", gen.future_years)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  generate->add_option("--first-year", gen.first_year)->capture_default_str();
  generate->add_option("--kappa", gen.kappa, "Smoothing of the base field")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  generate->add_option("--noise", gen.noise, "Relative noise on history years")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  generate->add_option("--roughness", gen.roughness)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  generate->add_option("--demand-scale", gen.demand_scale)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  generate->add_option("--load-fraction", gen.load_fraction,
                       "Peak demand as a fraction of maximum capacity")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  generate->add_option("--preexisting", gen.preexisting,
                       "Baseline coverage of the last history year")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  generate->add_flag("--mismatch", gen.mismatch,
                     "Perturb every year off the trend model");
  generate->add_option("--mismatch-sigma", gen.mismatch_sigma)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  ForecastOptions fc;
  CLI::App* forecast = app.add_subcommand("forecast", "Forecast demand");
  forecast->add_option("--kappa", fc.kappa, "Use this kappa instead of tuning")
      ->check(CLI::NonNegativeNumber);
  forecast->add_option("--kappa-grid", fc.kappa_grid,
                       "Tuning grid as lo:step:hi or a comma list")
      ->capture_default_str();
  forecast->add_option("--years", fc.years, "Number of years to forecast")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  forecast->add_option("--target-years", fc.target_years,
                       "Explicit target years")
      ->delimiter(',');
  forecast->add_option("--history", fc.history, "Demand history file");

  OptimizeOptions opt;
  CLI::App* optimize = app.add_subcommand("optimize", "Place chargers");
  opt.costs.add_to(optimize);
  optimize->add_option("--gap-tol", opt.gap_tol, "Relative optimality gap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  optimize->add_option("--time-limit", opt.time_limit, "Seconds per year")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  EvaluateOptions ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Validate and score");
  ev.costs.add_to(evaluate);
  evaluate->add_option("--ground-truth", ev.ground_truth,
                       "Actual demand (default: ground_truth.csv if present)");
  evaluate->add_flag("--no-ground-truth", ev.no_ground_truth,
                     "Skip the demand mismatch term");

  HeatmapOptions hm;
  CLI::App* heatmap = app.add_subcommand("heatmap", "Render a PGM heatmap");
  heatmap->add_option("--input", hm.input,
                      "demand_history.csv, forecast.csv or ground_truth.csv");
  heatmap->add_option("--year", hm.year, "Year to render");
  heatmap->add_flag("--mark-supply", hm.mark_supply,
                    "Overlay supply points as crosses");
  heatmap->add_option("--out", hm.output, "Output file name")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (g.deterministic) g.threads = 1;

  try {
    if (*generate) return cmd_generate(g, gen);
    if (*forecast) return cmd_forecast(g, fc);
    if (*optimize) return cmd_optimize(g, opt);
    if (*evaluate) return cmd_evaluate(g, ev);
    if (*heatmap) return cmd_heatmap(g, hm);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace evplace

int main(int argc, char** argv) { return evplace::run(argc, argv); }
