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

// The three cost components of a placement:
//
//   customer dissatisfaction  alpha * sum_ij x_ij d_ij
//   demand mismatch           beta  * sum_i |predicted_i - actual_i|
//   infrastructure            gamma * sum_j (scs_j + r * fcs_j)

#ifndef EVPLACE_COSTS_HPP_
#define EVPLACE_COSTS_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evplace/error.hpp"
#include "evplace/grid_model.hpp"

namespace evplace {

// One nonzero entry of the demand-to-supply assignment matrix.
struct AssignmentEntry {
  std::size_t demand = 0;
  std::size_t supply = 0;
  double amount = 0.0;

  friend bool operator==(const AssignmentEntry&,
                         const AssignmentEntry&) = default;
};

// Sparse assignment, sorted by (demand, supply).
using Assignment = std::vector<AssignmentEntry>;

inline double customer_dissatisfaction(const Assignment& x,
                                       const DistanceMatrix& d, double alpha) {
  double sum = 0.0;
  for (const AssignmentEntry& e : x) {
    if (e.demand >= d.point_count() || e.supply >= d.supply_count()) {
      throw InvalidArgument("assignment entry outside distance matrix");
    }
    sum += e.amount * d(e.demand, e.supply);
  }
  return alpha * sum;
}

inline double demand_mismatch(std::span<const double> predicted,
                              std::span<const double> actual, double beta) {
  if (predicted.size() != actual.size()) {
    throw InvalidArgument("demand mismatch: length " +
                          std::to_string(predicted.size()) + " vs " +
                          std::to_string(actual.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    sum += std::abs(predicted[i] - actual[i]);
  }
  return beta * sum;
}

inline double infrastructure_cost(std::span<const int> n_scs,
                                  std::span<const int> n_fcs, double gamma,
                                  double r) {
  if (n_scs.size() != n_fcs.size()) {
    throw InvalidArgument("charger count vectors differ in length");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n_scs.size(); ++j) {
    sum += static_cast<double>(n_scs[j]) + r * static_cast<double>(n_fcs[j]);
  }
  return gamma * sum;
}

}  // namespace evplace

#endif  // EVPLACE_COSTS_HPP_
