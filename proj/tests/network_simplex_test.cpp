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

#include "evplace/network_simplex.hpp"

#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace evplace {
namespace {

using Solver = NetworkSimplex<std::int64_t, double>;

TEST(NetworkSimplexTest, SingleArc) {
  Solver ns(2);
  ns.add_arc(0, 1, 10, 2.5);
  ns.set_supply(0, 4);
  ns.set_supply(1, -4);
  ASSERT_EQ(ns.solve(), Solver::Status::kOptimal);
  EXPECT_EQ(ns.flow(0), 4);
  EXPECT_DOUBLE_EQ(ns.total_cost(), 10.0);
}

TEST(NetworkSimplexTest, PrefersCheaperParallelPathUntilSaturated) {
  Solver ns(3);
  ns.add_arc(0, 1, 3, 1.0);
  ns.add_arc(1, 2, 3, 1.0);
  ns.add_arc(0, 2, 10, 5.0);
  ns.set_supply(0, 5);
  ns.set_supply(2, -5);
  ASSERT_EQ(ns.solve(), Solver::Status::kOptimal);
  EXPECT_EQ(ns.flow(0), 3);
  EXPECT_EQ(ns.flow(2), 2);
  EXPECT_DOUBLE_EQ(ns.total_cost(), 16.0);
}

TEST(NetworkSimplexTest, DetectsInfeasibility) {
  Solver ns(2);
  ns.add_arc(0, 1, 3, 1.0);
  ns.set_supply(0, 5);
  ns.set_supply(1, -5);
  EXPECT_EQ(ns.solve(), Solver::Status::kInfeasible);

  Solver unbalanced(2);
  unbalanced.add_arc(0, 1, 30, 1.0);
  unbalanced.set_supply(0, 5);
  unbalanced.set_supply(1, -4);
  EXPECT_EQ(unbalanced.solve(), Solver::Status::kInfeasible);
}

TEST(NetworkSimplexTest, ZeroSupplyIsTrivial) {
  Solver ns(3);
  ns.add_arc(0, 1, 3, 1.0);
  ns.add_arc(1, 2, 3, -1.0);
  ASSERT_EQ(ns.solve(), Solver::Status::kOptimal);
  // A negative-cost path without a cycle carries nothing when nothing is
  // injected.
  EXPECT_DOUBLE_EQ(ns.total_cost(), 0.0);
}

TEST(NetworkSimplexTest, NegativeCycleWithFiniteCapacityIsSaturated) {
  Solver ns(2);
  ns.add_arc(0, 1, 4, -3.0);
  ns.add_arc(1, 0, 4, 1.0);
  ASSERT_EQ(ns.solve(), Solver::Status::kOptimal);
  EXPECT_DOUBLE_EQ(ns.total_cost(), -8.0);
}

// Random sparse networks compared with the Bellman-Ford augmenting-path
// oracle, and every result certified by its potentials.
TEST(NetworkSimplexTest, MatchesAugmentingPathOracleOnRandomNetworks) {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const int m = static_cast<int>(rng() % (3 * n + 1));
    Solver ns(n);
    std::vector<oracle::FlowArc> arcs;
    for (int e = 0; e < m; ++e) {
      const int u = static_cast<int>(rng() % n);
      int v = static_cast<int>(rng() % n);
      if (v == u) v = (u + 1) % n;
      const std::int64_t cap = static_cast<std::int64_t>(rng() % 20);
      const double cost = static_cast<double>(rng() % 1000) / 37.0;
      ns.add_arc(u, v, cap, cost);
      arcs.push_back({u, v, static_cast<double>(cap), cost});
    }
    std::vector<double> supply(n, 0.0);
    for (int k = 0; k < n / 2; ++k) {
      const int u = static_cast<int>(rng() % n);
      const int v = static_cast<int>(rng() % n);
      const std::int64_t amount = static_cast<std::int64_t>(rng() % 15);
      supply[u] += static_cast<double>(amount);
      supply[v] -= static_cast<double>(amount);
    }
    for (int u = 0; u < n; ++u) {
      ns.set_supply(u, static_cast<std::int64_t>(supply[u]));
    }
    const auto expected = oracle::min_cost_flow(n, arcs, supply);
    const auto status = ns.solve();
    if (!expected) {
      EXPECT_EQ(status, Solver::Status::kInfeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(status, Solver::Status::kOptimal) << "trial " << trial;
    EXPECT_NEAR(ns.total_cost(), *expected, 1e-9 * (1.0 + std::abs(*expected)))
        << "trial " << trial;
    const auto flows = ns.flows();
    const auto pi = ns.potentials();
    const auto cert = check_certificate<std::int64_t, double>(ns, flows, pi, 1e-9);
    EXPECT_EQ(cert.violations, 0u) << "trial " << trial;
    // Flow conservation.
    std::vector<std::int64_t> balance(n, 0);
    for (int e = 0; e < ns.arc_count(); ++e) {
      EXPECT_GE(flows[e], 0);
      EXPECT_LE(flows[e], ns.arc_capacity(e));
      balance[ns.arc_source(e)] += flows[e];
      balance[ns.arc_target(e)] -= flows[e];
    }
    for (int u = 0; u < n; ++u) EXPECT_EQ(balance[u], ns.supply(u));
  }
}

TEST(NetworkSimplexTest, ReSolveAfterCapacityChange) {
  Solver ns(3);
  const int cheap = ns.add_arc(0, 2, 5, 1.0);
  ns.add_arc(0, 1, 10, 1.0);
  ns.add_arc(1, 2, 10, 1.0);
  ns.set_supply(0, 8);
  ns.set_supply(2, -8);
  ASSERT_EQ(ns.solve(), Solver::Status::kOptimal);
  EXPECT_DOUBLE_EQ(ns.total_cost(), 5.0 + 6.0);
  ns.set_capacity(cheap, 8);
  ASSERT_EQ(ns.solve(), Solver::Status::kOptimal);
  EXPECT_DOUBLE_EQ(ns.total_cost(), 8.0);
}

TEST(NetworkSimplexTest, CertificateFlagsTamperedPotentials) {
  Solver ns(2);
  ns.add_arc(0, 1, 10, 1.0);
  ns.add_arc(0, 1, 10, 3.0);
  ns.set_supply(0, 4);
  ns.set_supply(1, -4);
  ASSERT_EQ(ns.solve(), Solver::Status::kOptimal);
  const auto flows = ns.flows();
  auto pi = ns.potentials();
  EXPECT_EQ((check_certificate<std::int64_t, double>(ns, flows, pi, 1e-9)
                 .violations),
            0u);
  // Shift the head potential so the unused expensive arc looks profitable.
  pi[1] += 5.0;
  EXPECT_GT((check_certificate<std::int64_t, double>(ns, flows, pi, 1e-9)
                 .violations),
            0u);
}

}  // namespace
}  // namespace evplace
