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

// Solution checking and scoring.
//
// Constraint ids used in reports:
//   1  x_ij >= 0
//   2  charger counts >= 0
//   3  scs_j + fcs_j <= slots_j
//   4  counts >= baseline
//   5  sum_i x_ij <= cap_scs * scs_j + cap_fcs * fcs_j
//   6  sum_j x_ij == D_i

#ifndef EVPLACE_EVALUATION_HPP_
#define EVPLACE_EVALUATION_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evplace/costs.hpp"
#include "evplace/csv.hpp"
#include "evplace/error.hpp"
#include "evplace/optimizer.hpp"

namespace evplace {

struct CostBreakdown {
  double customer_dissatisfaction = 0.0;
  double demand_mismatch = 0.0;
  double infrastructure = 0.0;
  double total = 0.0;
  bool mismatch_available = false;
};

struct Violation {
  int constraint = 0;
  std::string location;
  double magnitude = 0.0;
};

struct ValidationReport {
  bool passed = true;
  std::vector<Violation> violations;
};

inline ValidationReport validate_solution(const PlacementModel& model,
                                          std::span<const int> n_scs,
                                          std::span<const int> n_fcs,
                                          const Assignment& x,
                                          double tol = kFeasibilityTol) {
  const std::size_t n = model.point_count();
  const std::size_t m = model.supply_count();
  if (n_scs.size() != m || n_fcs.size() != m) {
    throw InvalidArgument("solution has " + std::to_string(n_scs.size()) +
                          " supply points, model has " + std::to_string(m));
  }
  ValidationReport rep;
  auto add = [&](int id, std::string where, double mag) {
    rep.violations.push_back({id, std::move(where), mag});
  };
  std::vector<double> served(n, 0.0);
  std::vector<double> load(m, 0.0);
  for (const AssignmentEntry& e : x) {
    if (e.demand >= n || e.supply >= m) {
      throw InvalidArgument("assignment entry (" + std::to_string(e.demand) +
                            ", " + std::to_string(e.supply) +
                            ") outside the model");
    }
    if (e.amount < -tol) {
      add(1,
          "cell " + std::to_string(e.demand) + " -> supply " +
              std::to_string(e.supply),
          -e.amount);
    }
    served[e.demand] += e.amount;
    load[e.supply] += e.amount;
  }
  const CostParams& p = model.params();
  for (std::size_t j = 0; j < m; ++j) {
    const std::string where = "supply " + std::to_string(j);
    if (n_scs[j] < 0) add(2, where, -static_cast<double>(n_scs[j]));
    if (n_fcs[j] < 0) add(2, where, -static_cast<double>(n_fcs[j]));
    if (n_scs[j] + n_fcs[j] > model.slots()[j]) {
      add(3, where, n_scs[j] + n_fcs[j] - model.slots()[j]);
    }
    if (n_scs[j] < model.base_scs()[j]) {
      add(4, where, model.base_scs()[j] - n_scs[j]);
    }
    if (n_fcs[j] < model.base_fcs()[j]) {
      add(4, where, model.base_fcs()[j] - n_fcs[j]);
    }
    const double cap = p.cap_scs * n_scs[j] + p.cap_fcs * n_fcs[j];
    if (load[j] > cap + tol) add(5, where, load[j] - cap);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = std::abs(served[i] - model.demand()[i]);
    if (diff > tol) add(6, "cell " + std::to_string(i), diff);
  }
  rep.passed = rep.violations.empty();
  return rep;
}

inline ValidationReport validate_solution(const PlacementModel& model,
                                          const PlacementSolution& sol,
                                          double tol = kFeasibilityTol) {
  return validate_solution(model, sol.n_scs, sol.n_fcs, sol.assignment, tol);
}

// Without ground truth the mismatch term is 0 and marked unavailable.
inline CostBreakdown total_score(
    const PlacementModel& model, std::span<const int> n_scs,
    std::span<const int> n_fcs, const Assignment& x,
    std::optional<std::span<const double>> actual = std::nullopt) {
  const CostParams& p = model.params();
  CostBreakdown b;
  b.customer_dissatisfaction =
      customer_dissatisfaction(x, model.distances(), p.alpha);
  if (actual) {
    b.demand_mismatch = demand_mismatch(model.demand(), *actual, p.beta);
    b.mismatch_available = true;
  }
  b.infrastructure = infrastructure_cost(n_scs, n_fcs, p.gamma, p.r);
  b.total = b.customer_dissatisfaction + b.demand_mismatch + b.infrastructure;
  return b;
}

inline CostBreakdown total_score(
    const PlacementSolution& sol, const PlacementModel& model,
    std::optional<std::span<const double>> actual = std::nullopt) {
  return total_score(model, sol.n_scs, sol.n_fcs, sol.assignment, actual);
}

inline void write_score_csv(
    std::ostream& out,
    std::span<const std::pair<int, CostBreakdown>> rows) {
  out << "year,customer_dissatisfaction,demand_mismatch,infrastructure,total,"
         "mismatch_available\n";
  for (const auto& [year, b] : rows) {
    out << year << ',' << csv::format_double(b.customer_dissatisfaction)
        << ',' << csv::format_double(b.demand_mismatch) << ','
        << csv::format_double(b.infrastructure) << ','
        << csv::format_double(b.total) << ','
        << (b.mismatch_available ? 1 : 0) << '\n';
  }
}

}  // namespace evplace

#endif  // EVPLACE_EVALUATION_HPP_
