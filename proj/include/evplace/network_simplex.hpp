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

// Primal network simplex for balanced min-cost flow with integral flows.
//
// The spanning tree is stored with parent / thread / successor-count arrays
// and kept strongly feasible (Cunningham's leaving-arc rule), which rules out
// cycling on degenerate pivots. Entering arcs are chosen by block search:
// arcs are scanned cyclically in index order in blocks of about sqrt(m), and
// the most negative reduced cost in the first block containing a candidate
// enters, ties going to the lowest scanned position.
//
// On return the node potentials satisfy, for every arc e = (u, v),
//
//   cost(e) + pi(u) - pi(v) >= -tol   if flow(e) < cap(e)
//   cost(e) + pi(u) - pi(v) <=  tol   if flow(e) > 0
//
// which is the optimality certificate `check_certificate` verifies.

#ifndef EVPLACE_NETWORK_SIMPLEX_HPP_
#define EVPLACE_NETWORK_SIMPLEX_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "evplace/error.hpp"

namespace evplace {

template <typename Flow = std::int64_t, typename Cost = double>
class NetworkSimplex {
  static_assert(std::is_integral_v<Flow>, "flows must be integral");

 public:
  enum class Status { kOptimal, kInfeasible };

  static constexpr Flow kInfinite = std::numeric_limits<Flow>::max() / 4;

  explicit NetworkSimplex(int node_count) : node_count_(node_count) {
    if (node_count < 0) throw InvalidArgument("negative node count");
    supply_.assign(node_count, 0);
  }

  int node_count() const { return node_count_; }
  int arc_count() const { return static_cast<int>(source_.size()); }

  int add_arc(int from, int to, Flow capacity, Cost cost) {
    if (from < 0 || from >= node_count_ || to < 0 || to >= node_count_) {
      throw InvalidArgument("arc endpoint out of range");
    }
    if (capacity < 0) throw InvalidArgument("negative arc capacity");
    source_.push_back(from);
    target_.push_back(to);
    capacity_.push_back(std::min(capacity, kInfinite));
    cost_.push_back(cost);
    return static_cast<int>(source_.size()) - 1;
  }

  void set_capacity(int arc, Flow capacity) {
    capacity_[arc] = std::min(capacity, kInfinite);
  }
  void set_cost(int arc, Cost cost) { cost_[arc] = cost; }
  // Positive supply injects flow at the node; negative supply absorbs it.
  void set_supply(int node, Flow supply) { supply_[node] = supply; }

  int arc_source(int arc) const { return source_[arc]; }
  int arc_target(int arc) const { return target_[arc]; }
  Flow arc_capacity(int arc) const { return capacity_[arc]; }
  Cost arc_cost(int arc) const { return cost_[arc]; }
  Flow supply(int node) const { return supply_[node]; }

  Status solve() {
    Flow total = 0;
    for (Flow s : supply_) total += s;
    if (total != 0) return Status::kInfeasible;
    init();
    while (find_entering_arc()) {
      find_join_node();
      const bool change = find_leaving_arc();
      change_flow(change);
      if (change) {
        update_tree_structure();
        update_potential();
      }
    }
    for (int e = arc_count(); e < all_arc_num_; ++e) {
      if (flow_[e] != 0) return Status::kInfeasible;
    }
    recompute_potentials();
    return Status::kOptimal;
  }

  Flow flow(int arc) const { return flow_[arc]; }
  Cost potential(int node) const { return pi_[node]; }
  std::vector<Cost> potentials() const {
    return std::vector<Cost>(pi_.begin(), pi_.begin() + node_count_);
  }
  std::vector<Flow> flows() const {
    return std::vector<Flow>(flow_.begin(), flow_.begin() + arc_count());
  }

  // Sum of flow * cost over real arcs, accumulated in arc order.
  Cost total_cost() const {
    Cost c = 0;
    for (int e = 0; e < arc_count(); ++e) {
      if (flow_[e] != 0) c += static_cast<Cost>(flow_[e]) * cost_[e];
    }
    return c;
  }

  std::int64_t pivot_count() const { return pivots_; }

 private:
  static constexpr int kStateUpper = -1;
  static constexpr int kStateTree = 0;
  static constexpr int kStateLower = 1;
  static constexpr int kDirUp = 1;
  static constexpr int kDirDown = -1;

  void init() {
    const int n = node_count_;
    const int m = arc_count();
    all_arc_num_ = m + n;
    root_ = n;

    src_.assign(source_.begin(), source_.end());
    tgt_.assign(target_.begin(), target_.end());
    cap_.assign(capacity_.begin(), capacity_.end());
    cst_.assign(cost_.begin(), cost_.end());
    src_.resize(all_arc_num_);
    tgt_.resize(all_arc_num_);
    cap_.resize(all_arc_num_);
    cst_.resize(all_arc_num_);
    flow_.assign(all_arc_num_, 0);
    state_.assign(all_arc_num_, kStateLower);

    parent_.assign(n + 1, -1);
    pred_.assign(n + 1, -1);
    thread_.assign(n + 1, 0);
    rev_thread_.assign(n + 1, 0);
    succ_num_.assign(n + 1, 0);
    last_succ_.assign(n + 1, 0);
    pred_dir_.assign(n + 1, kDirUp);
    pi_.assign(n + 1, 0);

    Cost max_cost = 0;
    for (int e = 0; e < m; ++e) max_cost = std::max(max_cost, std::abs(cst_[e]));
    art_cost_ = (max_cost + 1) * static_cast<Cost>(n + 1);
    epsilon_ = static_cast<Cost>(1e-11) * (max_cost + 1);

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = n + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0;

    for (int u = 0, e = m; u != n; ++u, ++e) {
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      cap_[e] = kInfinite;
      state_[e] = kStateTree;
      if (supply_[u] >= 0) {
        pred_dir_[u] = kDirUp;
        pi_[u] = 0;
        src_[e] = u;
        tgt_[e] = root_;
        flow_[e] = supply_[u];
        cst_[e] = 0;
      } else {
        pred_dir_[u] = kDirDown;
        pi_[u] = art_cost_;
        src_[e] = root_;
        tgt_[e] = u;
        flow_[e] = -supply_[u];
        cst_[e] = art_cost_;
      }
    }
    if (n == 0) thread_[root_] = root_;
    // Only real arcs are priced; the artificial ones never re-enter.
    search_arc_num_ = m;
    block_size_ = std::max(10, static_cast<int>(std::ceil(std::sqrt(
                                   static_cast<double>(std::max(m, 1))))));
    next_arc_ = 0;
    pivots_ = 0;
  }

  Cost reduced_cost(int e) const {
    return cst_[e] + pi_[src_[e]] - pi_[tgt_[e]];
  }

  bool find_entering_arc() {
    if (search_arc_num_ == 0) return false;
    Cost min = -epsilon_;
    int cnt = block_size_;
    int e = next_arc_;
    bool found = false;
    for (int scanned = 0; scanned < search_arc_num_; ++scanned) {
      const Cost c = state_[e] * reduced_cost(e);
      if (c < min) {
        min = c;
        in_arc_ = e;
        found = true;
      }
      if (++e == search_arc_num_) e = 0;
      if (--cnt == 0) {
        if (found) break;
        cnt = block_size_;
      }
    }
    if (!found) return false;
    next_arc_ = e;
    ++pivots_;
    return true;
  }

  void find_join_node() {
    int u = src_[in_arc_];
    int v = tgt_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    join_ = u;
  }

  // Returns true when a tree arc leaves (false when the entering arc just
  // flips between its bounds).
  bool find_leaving_arc() {
    int first;
    int second;
    if (state_[in_arc_] == kStateLower) {
      first = src_[in_arc_];
      second = tgt_[in_arc_];
    } else {
      first = tgt_[in_arc_];
      second = src_[in_arc_];
    }
    delta_ = cap_[in_arc_];
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      const int e = pred_[u];
      Flow d = flow_[e];
      if (pred_dir_[u] == kDirDown) {
        d = cap_[e] >= kInfinite ? kInfinite : cap_[e] - d;
      }
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      const int e = pred_[u];
      Flow d = flow_[e];
      if (pred_dir_[u] == kDirUp) {
        d = cap_[e] >= kInfinite ? kInfinite : cap_[e] - d;
      }
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    if (delta_ >= kInfinite) {
      // Every cycle through the artificial root has finite capacity, so this
      // only happens on a negative cycle of infinite-capacity arcs.
      throw InvalidArgument("min-cost flow is unbounded");
    }
    return result != 0;
  }

  void change_flow(bool change) {
    if (delta_ > 0) {
      const Flow val = state_[in_arc_] * delta_;
      flow_[in_arc_] += val;
      for (int u = src_[in_arc_]; u != join_; u = parent_[u]) {
        flow_[pred_[u]] -= pred_dir_[u] * val;
      }
      for (int u = tgt_[in_arc_]; u != join_; u = parent_[u]) {
        flow_[pred_[u]] += pred_dir_[u] * val;
      }
    }
    if (change) {
      state_[in_arc_] = kStateTree;
      state_[pred_[u_out_]] =
          (flow_[pred_[u_out_]] == 0) ? kStateLower : kStateUpper;
    } else {
      state_[in_arc_] = -state_[in_arc_];
    }
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == src_[in_arc_] ? kDirUp : kDirDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      // When old_rev_thread == v_in, join and v_out coincide.
      const int thread_continue = old_rev_thread == v_in_
                                      ? thread_[old_last_succ]
                                      : thread_[v_in_];

      // Re-hang the stem (u_in ... u_out) below v_in, fixing the thread.
      int stem = u_in_;
      int par_stem = v_in_;
      int next_stem;
      int last = last_succ_[u_in_];
      int before;
      int after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);

        before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;

        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;

        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem]
                                                        : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;

      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }

      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      // pred, pred_dir, last_succ and succ_num along the stem.
      int tmp_sc = 0;
      const int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_;
           u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = -pred_dir_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == src_[in_arc_] ? kDirUp : kDirDown;
      succ_num_[u_in_] = old_succ_num;
    }

    // last_succ from v_in towards the root.
    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) {
      last_succ_[u] = last_succ_out;
    }

    // last_succ from v_out towards the root.
    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
           u = parent_[u]) {
        last_succ_[u] = old_rev_thread;
      }
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
           u = parent_[u]) {
        last_succ_[u] = last_succ_out;
      }
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const Cost sigma =
        pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cst_[in_arc_];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  // Rebuilds potentials from the tree so every tree arc has exactly zero
  // reduced cost, removing drift from incremental updates.
  void recompute_potentials() {
    pi_[root_] = 0;
    for (int u = thread_[root_]; u != root_; u = thread_[u]) {
      const int e = pred_[u];
      const int p = parent_[u];
      // Tree arc: cost + pi(src) - pi(tgt) = 0.
      if (pred_dir_[u] == kDirUp) {
        pi_[u] = pi_[p] - cst_[e];
      } else {
        pi_[u] = pi_[p] + cst_[e];
      }
    }
  }

  int node_count_;
  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<Flow> capacity_;
  std::vector<Cost> cost_;
  std::vector<Flow> supply_;

  // Working copies including the artificial arcs.
  std::vector<int> src_;
  std::vector<int> tgt_;
  std::vector<Flow> cap_;
  std::vector<Cost> cst_;
  std::vector<Flow> flow_;
  std::vector<signed char> state_;

  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<signed char> pred_dir_;
  std::vector<Cost> pi_;
  std::vector<int> dirty_revs_;

  int all_arc_num_ = 0;
  int search_arc_num_ = 0;
  int root_ = 0;
  int block_size_ = 10;
  int next_arc_ = 0;
  Cost art_cost_ = 0;
  Cost epsilon_ = 0;
  std::int64_t pivots_ = 0;

  int in_arc_ = -1;
  int join_ = -1;
  int u_in_ = -1;
  int v_in_ = -1;
  int u_out_ = -1;
  int v_out_ = -1;
  Flow delta_ = 0;
};

struct CertificateReport {
  std::size_t violations = 0;
  double worst = 0.0;  // most negative effective reduced cost seen
};

// Checks complementary slackness of (flows, potentials) over a network. The
// check is O(arcs) and independent of how the flow was produced.
template <typename Flow, typename Cost>
CertificateReport check_certificate(const NetworkSimplex<Flow, Cost>& net,
                                    std::span<const Flow> flows,
                                    std::span<const Cost> potentials,
                                    double tol) {
  CertificateReport report;
  for (int e = 0; e < net.arc_count(); ++e) {
    const double rc = static_cast<double>(net.arc_cost(e)) +
                      static_cast<double>(potentials[net.arc_source(e)]) -
                      static_cast<double>(potentials[net.arc_target(e)]);
    const Flow f = flows[e];
    double bad = 0.0;
    if (f < net.arc_capacity(e) && rc < -tol) bad = rc;
    if (f > 0 && rc > tol) bad = std::min(bad, -rc);
    if (bad < 0.0) {
      ++report.violations;
      report.worst = std::min(report.worst, bad);
    }
  }
  return report;
}

}  // namespace evplace

#endif  // EVPLACE_NETWORK_SIMPLEX_HPP_
