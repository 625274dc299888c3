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

// Charger placement as a mixed-integer program:
//
//   min  alpha * sum_ij x_ij d_ij + gamma * sum_j (scs_j + r * fcs_j)
//   s.t. sum_j x_ij = D_i                          (every cell served)
//        sum_i x_ij <= cap_scs * scs_j + cap_fcs * fcs_j
//        scs_j + fcs_j <= slots_j
//        scs_j >= base_scs_j, fcs_j >= base_fcs_j, integer
//        x >= 0
//
// The continuous relaxation is a min-cost flow: cells -> supply points ->
// capacity tranches -> sink. The tranches of a supply point are the segments
// of the lower convex hull of (capacity, cost) over the polygon of admissible
// fractional (scs, fcs). Branch-and-bound tightens the polygon.

#ifndef EVPLACE_OPTIMIZER_HPP_
#define EVPLACE_OPTIMIZER_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "evplace/costs.hpp"
#include "evplace/csv.hpp"
#include "evplace/error.hpp"
#include "evplace/grid_model.hpp"
#include "evplace/network_simplex.hpp"
#include "evplace/parallel.hpp"

namespace evplace {

struct CostParams {
  double alpha = 1.0;
  double beta = 25.0;
  double gamma = 600.0;
  double r = 1.5;
  double cap_scs = 200.0;
  double cap_fcs = 400.0;

  void validate() const {
    const std::pair<const char*, double> fields[] = {
        {"alpha", alpha}, {"beta", beta},       {"gamma", gamma},
        {"r", r},         {"cap_scs", cap_scs}, {"cap_fcs", cap_fcs}};
    for (const auto& [name, v] : fields) {
      if (!std::isfinite(v) || v <= 0.0) {
        throw InvalidArgument(std::string("cost parameter ") + name +
                              " must be positive and finite");
      }
    }
  }
};

// Absolute tolerance on continuous rows, shared with the validator.
inline constexpr double kFeasibilityTol = 1e-6;

// Demands are multiplied by this and rounded half-even before entering the
// integral flow solver.
inline constexpr double kFlowScale = 1e6;

inline std::int64_t scale_amount(double v) {
  return static_cast<std::int64_t>(std::nearbyint(v * kFlowScale));
}

class PlacementModel {
 public:
  PlacementModel(std::shared_ptr<const DistanceMatrix> distances,
                 std::vector<double> demand, std::vector<int> slots,
                 std::vector<int> base_scs, std::vector<int> base_fcs,
                 CostParams params)
      : distances_(std::move(distances)),
        demand_(std::move(demand)),
        slots_(std::move(slots)),
        base_scs_(std::move(base_scs)),
        base_fcs_(std::move(base_fcs)),
        params_(params) {}

  const DistanceMatrix& distances() const { return *distances_; }
  std::shared_ptr<const DistanceMatrix> shared_distances() const {
    return distances_;
  }
  std::span<const double> demand() const { return demand_; }
  std::span<const int> slots() const { return slots_; }
  std::span<const int> base_scs() const { return base_scs_; }
  std::span<const int> base_fcs() const { return base_fcs_; }
  const CostParams& params() const { return params_; }

  std::size_t point_count() const { return demand_.size(); }
  std::size_t supply_count() const { return slots_.size(); }
  std::size_t num_continuous_variables() const {
    return point_count() * supply_count();
  }
  std::size_t num_integer_variables() const { return 2 * supply_count(); }

  double total_demand() const {
    double s = 0.0;
    for (double d : demand_) s += d;
    return s;
  }

  // Largest capacity reachable at supply j without removing chargers.
  double max_capacity(std::size_t j) const {
    const int free = slots_[j] - base_scs_[j] - base_fcs_[j];
    const double best = std::max(params_.cap_scs, params_.cap_fcs);
    return params_.cap_scs * base_scs_[j] + params_.cap_fcs * base_fcs_[j] +
           best * free;
  }
  double max_capacity() const {
    double s = 0.0;
    for (std::size_t j = 0; j < supply_count(); ++j) s += max_capacity(j);
    return s;
  }

  // gamma * sum_j (base_scs_j + r * base_fcs_j): paid whatever is built.
  double baseline_cost() const {
    return infrastructure_cost(base_scs_, base_fcs_, params_.gamma, params_.r);
  }

 private:
  std::shared_ptr<const DistanceMatrix> distances_;
  std::vector<double> demand_;
  std::vector<int> slots_;
  std::vector<int> base_scs_;
  std::vector<int> base_fcs_;
  CostParams params_;
};

inline PlacementModel build_model(
    std::shared_ptr<const DistanceMatrix> distances,
    std::span<const double> demand, const InfrastructureState& infra,
    const CostParams& params) {
  params.validate();
  infra.validate();
  if (!distances) throw InvalidArgument("null distance matrix");
  if (distances->point_count() != demand.size() ||
      distances->supply_count() != infra.size()) {
    throw InvalidArgument("model shape mismatch: " +
                          std::to_string(demand.size()) + " cells and " +
                          std::to_string(infra.size()) +
                          " supply points vs distance matrix " +
                          std::to_string(distances->point_count()) + "x" +
                          std::to_string(distances->supply_count()));
  }
  for (std::size_t i = 0; i < demand.size(); ++i) {
    if (!std::isfinite(demand[i]) || demand[i] < 0.0) {
      throw InvalidArgument("demand at cell " + std::to_string(i) +
                            " must be finite and nonnegative");
    }
  }
  std::vector<int> slots, bs, bf;
  for (const SupplyPoint& sp : infra.supply_points) {
    slots.push_back(sp.parking_slots);
    bs.push_back(sp.existing_scs);
    bf.push_back(sp.existing_fcs);
  }
  PlacementModel model(std::move(distances),
                       std::vector<double>(demand.begin(), demand.end()),
                       std::move(slots), std::move(bs), std::move(bf), params);
  const double total = model.total_demand();
  const double cap = model.max_capacity();
  if (total > cap) {
    throw InfeasibleError("infeasible instance: total demand " +
                          csv::format_double(total) +
                          " exceeds maximum buildable capacity " +
                          csv::format_double(cap));
  }
  if (total * kFlowScale > 1e18) {
    throw InvalidArgument("total demand too large for the flow solver");
  }
  return model;
}

inline PlacementModel build_model(const GridSpec& grid,
                                  std::span<const double> demand,
                                  const InfrastructureState& infra,
                                  const CostParams& params) {
  return build_model(
      std::make_shared<const DistanceMatrix>(distance_matrix(grid, infra)),
      demand, infra, params);
}

// ---------------------------------------------------------------------------
// Capacity envelopes
// ---------------------------------------------------------------------------

// Integer box on (scs, fcs) at one supply point.
struct CountBox {
  int scs_lo = 0;
  int scs_hi = 0;
  int fcs_lo = 0;
  int fcs_hi = 0;
};

struct EnvelopeVertex {
  int scs = 0;
  int fcs = 0;
  std::int64_t capacity = 0;  // scaled
  double cost = 0.0;
};

// Lower convex hull of (capacity, cost) over the box clipped by
// scs + fcs <= slots. Vertices run by increasing capacity; vertices[0] is the
// cheapest admissible point. Empty when the region is empty.
struct CapacityEnvelope {
  std::vector<EnvelopeVertex> vertices;

  bool empty() const { return vertices.empty(); }
  std::int64_t min_capacity() const { return vertices.front().capacity; }
  std::int64_t max_capacity() const { return vertices.back().capacity; }

  // Fractional (scs, fcs) on the envelope at scaled capacity u.
  std::pair<double, double> counts_at(std::int64_t u) const {
    if (u <= vertices.front().capacity) {
      return {vertices.front().scs, vertices.front().fcs};
    }
    for (std::size_t k = 1; k < vertices.size(); ++k) {
      const EnvelopeVertex& a = vertices[k - 1];
      const EnvelopeVertex& b = vertices[k];
      if (u <= b.capacity) {
        if (u == b.capacity) return {b.scs, b.fcs};
        const double t = static_cast<double>(u - a.capacity) /
                         static_cast<double>(b.capacity - a.capacity);
        return {a.scs + t * (b.scs - a.scs), a.fcs + t * (b.fcs - a.fcs)};
      }
    }
    return {vertices.back().scs, vertices.back().fcs};
  }
};

inline CapacityEnvelope capacity_envelope(const CountBox& box, int slots,
                                          const CostParams& params) {
  CapacityEnvelope env;
  if (box.scs_lo > box.scs_hi || box.fcs_lo > box.fcs_hi ||
      box.scs_lo + box.fcs_lo > slots) {
    return env;
  }
  const std::int64_t cs = scale_amount(params.cap_scs);
  const std::int64_t cf = scale_amount(params.cap_fcs);
  std::vector<std::pair<int, int>> pts = {{box.scs_lo, box.fcs_lo},
                                          {box.scs_hi, box.fcs_lo},
                                          {box.scs_lo, box.fcs_hi},
                                          {box.scs_hi, box.fcs_hi},
                                          {slots - box.fcs_lo, box.fcs_lo},
                                          {box.scs_lo, slots - box.scs_lo},
                                          {slots - box.fcs_hi, box.fcs_hi},
                                          {box.scs_hi, slots - box.scs_hi}};
  std::vector<EnvelopeVertex> cand;
  for (const auto& [s, f] : pts) {
    if (s < box.scs_lo || s > box.scs_hi || f < box.fcs_lo || f > box.fcs_hi ||
        s + f > slots) {
      continue;
    }
    cand.push_back({s, f, cs * s + cf * f,
                    params.gamma * (static_cast<double>(s) +
                                    params.r * static_cast<double>(f))});
  }
  std::sort(cand.begin(), cand.end(),
            [](const EnvelopeVertex& a, const EnvelopeVertex& b) {
              if (a.capacity != b.capacity) return a.capacity < b.capacity;
              if (a.cost != b.cost) return a.cost < b.cost;
              return a.fcs < b.fcs;
            });
  // Keep the cheapest point per capacity, then the monotone-chain lower hull.
  std::vector<EnvelopeVertex> hull;
  for (std::size_t k = 0; k < cand.size(); ++k) {
    if (k > 0 && cand[k].capacity == cand[k - 1].capacity) continue;
    const EnvelopeVertex& p = cand[k];
    while (hull.size() >= 2) {
      const EnvelopeVertex& a = hull[hull.size() - 2];
      const EnvelopeVertex& b = hull.back();
      const double cross =
          (b.cost - a.cost) * static_cast<double>(p.capacity - a.capacity) -
          (p.cost - a.cost) * static_cast<double>(b.capacity - a.capacity);
      if (cross < 0.0) break;  // b lies strictly below segment a-p
      hull.pop_back();
    }
    hull.push_back(p);
  }
  env.vertices = std::move(hull);
  return env;
}

// Cheapest integer (scs, fcs) in the box whose capacity reaches `used`
// (scaled). Ties go to fewer fast chargers. nullopt if none exists.
inline std::optional<std::pair<int, int>> cheapest_cover(
    const CountBox& box, int slots, const CostParams& params,
    std::int64_t used) {
  const std::int64_t cs = scale_amount(params.cap_scs);
  const std::int64_t cf = scale_amount(params.cap_fcs);
  std::optional<std::pair<int, int>> best;
  double best_cost = std::numeric_limits<double>::infinity();
  const int f_hi = std::min(box.fcs_hi, slots - box.scs_lo);
  for (int f = box.fcs_lo; f <= f_hi; ++f) {
    const std::int64_t rest = used - cf * f;
    int s = box.scs_lo;
    if (rest > 0) {
      s = std::max<std::int64_t>(s, (rest + cs - 1) / cs);
    }
    if (s > box.scs_hi || s + f > slots) continue;
    const double cost = params.gamma * (static_cast<double>(s) +
                                        params.r * static_cast<double>(f));
    if (cost < best_cost) {
      best_cost = cost;
      best = std::make_pair(s, f);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Flow network
// ---------------------------------------------------------------------------

// Cells with positive demand, supply points and one sink. Arc a*M + j joins
// active cell a to supply j; each supply then owns kTranches arcs to the sink.
class FlowNetwork {
 public:
  static constexpr int kTranches = 5;
  using Solver = NetworkSimplex<std::int64_t, double>;

  explicit FlowNetwork(const PlacementModel& model)
      : model_(&model),
        active_(active_cells(model)),
        net_(static_cast<int>(active_.size() + model.supply_count() + 1)) {
    const std::size_t m = model.supply_count();
    const double alpha = model.params().alpha;
    const int sink = sink_node();
    std::int64_t total = 0;
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const std::size_t i = active_[a];
      const std::int64_t amount = scale_amount(model.demand()[i]);
      scaled_demand_.push_back(amount);
      total += amount;
      net_.set_supply(static_cast<int>(a), amount);
      for (std::size_t j = 0; j < m; ++j) {
        net_.add_arc(static_cast<int>(a), supply_node(j), Solver::kInfinite,
                     alpha * model.distances()(i, j));
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (int k = 0; k < kTranches; ++k) {
        net_.add_arc(supply_node(j), sink, 0, 0.0);
      }
    }
    net_.set_supply(sink, -total);
    total_scaled_ = total;
  }

  std::size_t active_count() const { return active_.size(); }
  std::span<const std::size_t> active_cells() const { return active_; }
  int node_count() const { return net_.node_count(); }
  int arc_count() const { return net_.arc_count(); }
  std::int64_t total_injected() const { return total_scaled_; }
  const Solver& solver() const { return net_; }

  // Relaxation: tranche arcs follow each supply's envelope. The first tranche
  // carries the envelope's minimum capacity at zero marginal cost.
  bool solve_envelopes(std::span<const CapacityEnvelope> envelopes) {
    for (std::size_t j = 0; j < envelopes.size(); ++j) {
      const auto& v = envelopes[j].vertices;
      for (int k = 0; k < kTranches; ++k) {
        const int arc = tranche_arc(j, k);
        if (k == 0) {
          net_.set_capacity(arc, v.front().capacity);
          net_.set_cost(arc, 0.0);
        } else if (static_cast<std::size_t>(k) < v.size()) {
          const std::int64_t width = v[k].capacity - v[k - 1].capacity;
          net_.set_capacity(arc, width);
          net_.set_cost(arc, (v[k].cost - v[k - 1].cost) * kFlowScale /
                                 static_cast<double>(width));
        } else {
          net_.set_capacity(arc, 0);
          net_.set_cost(arc, 0.0);
        }
      }
    }
    return net_.solve() == Solver::Status::kOptimal;
  }

  // Transportation with fixed scaled capacities.
  bool solve_fixed(std::span<const std::int64_t> capacity) {
    for (std::size_t j = 0; j < capacity.size(); ++j) {
      for (int k = 0; k < kTranches; ++k) {
        const int arc = tranche_arc(j, k);
        net_.set_capacity(arc, k == 0 ? capacity[j] : 0);
        net_.set_cost(arc, 0.0);
      }
    }
    return net_.solve() == Solver::Status::kOptimal;
  }

  // Sum of flow * cost over every arc, in demand units.
  double total_cost() const { return net_.total_cost() / kFlowScale; }

  // alpha * sum x d over cell arcs, in demand units.
  double transport_cost() const {
    double c = 0.0;
    const int cell_arcs = static_cast<int>(active_.size() * supplies());
    for (int e = 0; e < cell_arcs; ++e) {
      const std::int64_t f = net_.flow(e);
      if (f != 0) c += static_cast<double>(f) * net_.arc_cost(e);
    }
    return c / kFlowScale;
  }

  std::vector<std::int64_t> supply_usage() const {
    std::vector<std::int64_t> used(supplies(), 0);
    for (std::size_t j = 0; j < supplies(); ++j) {
      for (int k = 0; k < kTranches; ++k) used[j] += net_.flow(tranche_arc(j, k));
    }
    return used;
  }

  Assignment assignment() const {
    Assignment x;
    const std::size_t m = supplies();
    for (std::size_t a = 0; a < active_.size(); ++a) {
      for (std::size_t j = 0; j < m; ++j) {
        const std::int64_t f = net_.flow(static_cast<int>(a * m + j));
        if (f != 0) {
          x.push_back({active_[a], j, static_cast<double>(f) / kFlowScale});
        }
      }
    }
    return x;
  }

  std::vector<double> potentials() const { return net_.potentials(); }

  CertificateReport certify() const {
    const auto flows = net_.flows();
    const auto pi = net_.potentials();
    double scale = 1.0;
    for (int e = 0; e < net_.arc_count(); ++e) {
      scale = std::max(scale, std::abs(net_.arc_cost(e)));
    }
    return check_certificate<std::int64_t, double>(net_, flows, pi,
                                                   1e-9 * scale);
  }

  // Upper bound on |LP(scaled demand) - LP(true demand)|.
  double rounding_perturbation(double max_unit_cost) const {
    double err = 0.0;
    for (std::size_t a = 0; a < active_.size(); ++a) {
      err += std::abs(static_cast<double>(scaled_demand_[a]) / kFlowScale -
                      model_->demand()[active_[a]]);
    }
    return err * max_unit_cost;
  }

 private:
  static std::vector<std::size_t> active_cells(const PlacementModel& model) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < model.point_count(); ++i) {
      if (scale_amount(model.demand()[i]) > 0) out.push_back(i);
    }
    return out;
  }
  std::size_t supplies() const { return model_->supply_count(); }
  int supply_node(std::size_t j) const {
    return static_cast<int>(active_.size() + j);
  }
  int sink_node() const {
    return static_cast<int>(active_.size() + supplies());
  }
  int tranche_arc(std::size_t j, int k) const {
    return static_cast<int>(active_.size() * supplies() + j * kTranches + k);
  }

  const PlacementModel* model_;
  std::vector<std::size_t> active_;
  std::vector<std::int64_t> scaled_demand_;
  std::int64_t total_scaled_ = 0;
  Solver net_;
};

namespace detail {

inline std::vector<CountBox> root_boxes(const PlacementModel& model) {
  std::vector<CountBox> boxes(model.supply_count());
  for (std::size_t j = 0; j < boxes.size(); ++j) {
    boxes[j] = {model.base_scs()[j], model.slots()[j], model.base_fcs()[j],
                model.slots()[j]};
  }
  return boxes;
}

// Largest per-unit cost of any cell -> supply -> sink path, used to bound
// the effect of demand rounding.
inline double max_path_cost(const PlacementModel& model) {
  double d = 0.0;
  for (std::size_t i = 0; i < model.point_count(); ++i) {
    if (model.demand()[i] <= 0.0) continue;
    for (double v : model.distances().row(i)) d = std::max(d, v);
  }
  const CostParams& p = model.params();
  return p.alpha * d +
         std::max(p.gamma / p.cap_scs, p.gamma * p.r / p.cap_fcs);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Relaxation and transportation
// ---------------------------------------------------------------------------

struct LpRelaxation {
  double lower_bound = 0.0;
  std::vector<double> n_scs;  // fractional counts on the envelope
  std::vector<double> n_fcs;
  Assignment assignment;
  // Indexed by flow node: active cells in index order, supply points, sink.
  std::vector<double> potentials;
  CertificateReport certificate;
};

inline LpRelaxation solve_lp_relaxation(const PlacementModel& model) {
  FlowNetwork net(model);
  const auto boxes = detail::root_boxes(model);
  std::vector<CapacityEnvelope> env(boxes.size());
  for (std::size_t j = 0; j < boxes.size(); ++j) {
    env[j] = capacity_envelope(boxes[j], model.slots()[j], model.params());
  }
  if (!net.solve_envelopes(env)) {
    throw InfeasibleError("infeasible relaxation");
  }
  LpRelaxation out;
  double constant = 0.0;
  for (const CapacityEnvelope& e : env) constant += e.vertices.front().cost;
  const double raw = net.total_cost() + constant;
  out.lower_bound = std::max(
      constant,
      raw - net.rounding_perturbation(detail::max_path_cost(model)));
  const auto used = net.supply_usage();
  for (std::size_t j = 0; j < env.size(); ++j) {
    const auto [s, f] = env[j].counts_at(used[j]);
    out.n_scs.push_back(s);
    out.n_fcs.push_back(f);
  }
  out.assignment = net.assignment();
  out.potentials = net.potentials();
  out.certificate = net.certify();
  return out;
}

struct TransportationResult {
  Assignment assignment;
  double transport_cost = 0.0;
  std::vector<double> potentials;
  CertificateReport certificate;
};

inline void check_counts(const PlacementModel& model,
                         std::span<const int> n_scs,
                         std::span<const int> n_fcs) {
  if (n_scs.size() != model.supply_count() ||
      n_fcs.size() != model.supply_count()) {
    throw InvalidArgument("charger count vectors must have one entry per "
                          "supply point");
  }
  for (std::size_t j = 0; j < n_scs.size(); ++j) {
    if (n_scs[j] < model.base_scs()[j] || n_fcs[j] < model.base_fcs()[j] ||
        n_scs[j] + n_fcs[j] > model.slots()[j]) {
      throw InvalidArgument("charger counts at supply point " +
                            std::to_string(j) +
                            " violate baseline or slot limits");
    }
  }
}

namespace detail {

inline std::vector<std::int64_t> scaled_capacity(const CostParams& p,
                                                 std::span<const int> n_scs,
                                                 std::span<const int> n_fcs) {
  const std::int64_t cs = scale_amount(p.cap_scs);
  const std::int64_t cf = scale_amount(p.cap_fcs);
  std::vector<std::int64_t> cap(n_scs.size());
  for (std::size_t j = 0; j < cap.size(); ++j) {
    cap[j] = cs * n_scs[j] + cf * n_fcs[j];
  }
  return cap;
}

inline TransportationResult transport_on(FlowNetwork& net,
                                         const PlacementModel& model,
                                         std::span<const int> n_scs,
                                         std::span<const int> n_fcs) {
  const auto cap = scaled_capacity(model.params(), n_scs, n_fcs);
  std::int64_t total = 0;
  for (std::int64_t c : cap) total += c;
  if (total < net.total_injected() || !net.solve_fixed(cap)) {
    throw InfeasibleError("counts infeasible: capacity " +
                          csv::format_double(static_cast<double>(total) /
                                             kFlowScale) +
                          " below total demand " +
                          csv::format_double(model.total_demand()));
  }
  TransportationResult out;
  out.assignment = net.assignment();
  out.transport_cost = customer_dissatisfaction(
      out.assignment, model.distances(), model.params().alpha);
  out.potentials = net.potentials();
  out.certificate = net.certify();
  return out;
}

}  // namespace detail

inline TransportationResult solve_transportation(const PlacementModel& model,
                                                 std::span<const int> n_scs,
                                                 std::span<const int> n_fcs) {
  check_counts(model, n_scs, n_fcs);
  FlowNetwork net(model);
  return detail::transport_on(net, model, n_scs, n_fcs);
}

// ---------------------------------------------------------------------------
// Branch-and-bound
// ---------------------------------------------------------------------------

struct MipOptions {
  double gap_tol = 1e-4;
  double time_limit_seconds = 600.0;
  // Forces one node at a time; otherwise up to `threads` nodes are expanded
  // per round.
  bool deterministic = true;
  int threads = 1;
  // Open nodes beyond this switch selection to depth-first.
  std::size_t max_open_nodes = 1'000'000;
  // Check the potentials certificate after every flow solve.
  bool verify_certificates = false;
};

struct SolveStats {
  std::int64_t flow_solves = 0;
  std::int64_t certificate_checks = 0;
  std::int64_t certificate_failures = 0;
  double worst_reduced_cost = 0.0;
};

struct PlacementSolution {
  std::vector<int> n_scs;
  std::vector<int> n_fcs;
  Assignment assignment;
  double objective = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;
  std::int64_t node_count = 0;
  std::chrono::duration<double> wall_time{0.0};
  double transport_cost = 0.0;
  double infrastructure_cost = 0.0;
  SolveStats stats;
};

inline double relative_gap(double z, double lb) {
  return (z - lb) / std::max(lb, 1e-12);
}

namespace detail {

struct BoundChange {
  std::int32_t supply;
  bool fast;   // fcs when true, scs otherwise
  bool lower;  // raises the lower bound when true
  std::int32_t value;
};

struct Node {
  double bound = 0.0;
  std::uint64_t id = 0;
  std::vector<BoundChange> changes;
  // Branching candidate from this node's relaxation.
  std::int32_t branch_supply = -1;
  bool branch_fast = false;
  double branch_value = 0.0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

struct Candidate {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<int> n_scs;
  std::vector<int> n_fcs;
  Assignment assignment;
  double transport_cost = 0.0;
};

struct NodeEval {
  bool feasible = false;
  double bound = 0.0;
  std::int32_t branch_supply = -1;
  bool branch_fast = false;
  double branch_value = 0.0;
  std::optional<Candidate> candidate;  // set when it beats the cutoff
  SolveStats stats;
};

inline void record_certificate(const FlowNetwork& net, bool verify,
                               SolveStats* stats) {
  ++stats->flow_solves;
  if (!verify) return;
  const CertificateReport rep = net.certify();
  ++stats->certificate_checks;
  if (rep.violations > 0) ++stats->certificate_failures;
  stats->worst_reduced_cost = std::min(stats->worst_reduced_cost, rep.worst);
}

inline void merge_stats(SolveStats* into, const SolveStats& s) {
  into->flow_solves += s.flow_solves;
  into->certificate_checks += s.certificate_checks;
  into->certificate_failures += s.certificate_failures;
  into->worst_reduced_cost =
      std::min(into->worst_reduced_cost, s.worst_reduced_cost);
}

class BranchAndBound {
 public:
  BranchAndBound(const PlacementModel& model, const MipOptions& options)
      : model_(model),
        options_(options),
        root_(root_boxes(model)),
        path_cost_(max_path_cost(model)) {}

  PlacementSolution run() {
    const auto start = std::chrono::steady_clock::now();
    const int workers =
        options_.deterministic ? 1 : std::max(1, options_.threads);
    for (int w = 0; w < workers; ++w) {
      networks_.push_back(std::make_unique<FlowNetwork>(model_));
    }
    for (auto& n : networks_) free_.push_back(n.get());
    perturbation_ = networks_[0]->rounding_perturbation(path_cost_);

    Node root;
    root.id = next_id_++;
    NodeEval re = evaluate(root.changes, *networks_[0], best_.objective);
    if (!re.feasible) throw InfeasibleError("infeasible relaxation");
    ++node_count_;
    merge_stats(&stats_, re.stats);
    if (re.candidate) accept(std::move(*re.candidate));
    root.bound = re.bound;
    if (!std::isfinite(best_.objective)) throw Error("no incumbent");
    if (re.branch_supply >= 0 && !prunable(root.bound)) {
      root.branch_supply = re.branch_supply;
      root.branch_fast = re.branch_fast;
      root.branch_value = re.branch_value;
      push(std::move(root));
    } else {
      note_pruned(root.bound);
    }

    double lp_seconds = seconds_since(start);
    if (!heap_.empty()) dive(start, lp_seconds);
    while (!heap_.empty() || !stack_.empty()) {
      if (relative_gap(best_.objective, global_bound()) <= options_.gap_tol) {
        break;
      }
      const double elapsed = seconds_since(start);
      // Stop before a round that would overrun the limit.
      if (elapsed + 2.0 * lp_seconds > options_.time_limit_seconds) break;

      std::vector<Node> batch;
      while (static_cast<int>(batch.size()) < workers &&
             (!heap_.empty() || !stack_.empty())) {
        Node n = pop();
        if (prunable(n.bound)) {
          note_pruned(n.bound);
          continue;
        }
        batch.push_back(std::move(n));
      }
      if (batch.empty()) continue;

      std::vector<std::vector<BoundChange>> kids;
      for (const Node& n : batch) {
        for (int side = 0; side < 2; ++side) {
          std::vector<BoundChange> c = n.changes;
          const bool lower = side == 1;
          const int value = lower ? static_cast<int>(std::ceil(n.branch_value))
                                  : static_cast<int>(std::floor(n.branch_value));
          c.push_back({n.branch_supply, n.branch_fast, lower, value});
          kids.push_back(std::move(c));
        }
      }
      const auto round_start = std::chrono::steady_clock::now();
      std::vector<NodeEval> evals(kids.size());
      const double cutoff = best_.objective;
      parallel_for(kids.size(), workers, [&](std::size_t k) {
        FlowNetwork* net = acquire();
        try {
          evals[k] = evaluate(kids[k], *net, cutoff);
        } catch (...) {
          release(net);
          throw;
        }
        release(net);
      });
      node_count_ += static_cast<std::int64_t>(kids.size());
      lp_seconds = std::max(
          lp_seconds, seconds_since(round_start) /
                          std::max<std::size_t>(1, (kids.size() + workers - 1) /
                                                       workers));
      // Children are merged in creation order whatever the thread timing.
      for (std::size_t k = 0; k < kids.size(); ++k) {
        NodeEval& e = evals[k];
        merge_stats(&stats_, e.stats);
        if (!e.feasible) continue;
        if (e.candidate) accept(std::move(*e.candidate));
        if (e.branch_supply < 0 || prunable(e.bound)) {
          if (e.bound < best_.objective) note_pruned(e.bound);
          continue;
        }
        Node child;
        child.bound = e.bound;
        child.id = next_id_++;
        child.changes = std::move(kids[k]);
        child.branch_supply = e.branch_supply;
        child.branch_fast = e.branch_fast;
        child.branch_value = e.branch_value;
        push(std::move(child));
      }
    }

    PlacementSolution sol;
    sol.n_scs = best_.n_scs;
    sol.n_fcs = best_.n_fcs;
    sol.assignment = std::move(best_.assignment);
    sol.transport_cost = best_.transport_cost;
    sol.infrastructure_cost = infrastructure_cost(
        sol.n_scs, sol.n_fcs, model_.params().gamma, model_.params().r);
    sol.objective = sol.transport_cost + sol.infrastructure_cost;
    sol.lower_bound = std::min(global_bound(), sol.objective);
    sol.gap = relative_gap(sol.objective, sol.lower_bound);
    sol.node_count = node_count_;
    sol.stats = stats_;
    sol.wall_time = std::chrono::steady_clock::now() - start;
    return sol;
  }

 private:
  static double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t)
        .count();
  }

  FlowNetwork* acquire() {
    std::lock_guard<std::mutex> lock(mu_);
    FlowNetwork* n = free_.back();
    free_.pop_back();
    return n;
  }
  void release(FlowNetwork* n) {
    std::lock_guard<std::mutex> lock(mu_);
    free_.push_back(n);
  }

  bool prunable(double bound) const {
    return best_.objective - bound <=
           options_.gap_tol * std::max(std::abs(bound), 1e-12);
  }
  void note_pruned(double bound) { pruned_min_ = std::min(pruned_min_, bound); }

  double global_bound() const {
    double lb = std::min(pruned_min_, best_.objective);
    if (!heap_.empty()) lb = std::min(lb, heap_.top().bound);
    if (!stack_min_.empty()) lb = std::min(lb, stack_min_.back());
    return lb;
  }

  void push(Node n) {
    if (heap_.size() + stack_.size() >= options_.max_open_nodes) {
      const double m =
          stack_min_.empty() ? n.bound : std::min(stack_min_.back(), n.bound);
      stack_.push_back(std::move(n));
      stack_min_.push_back(m);
    } else {
      heap_.push(std::move(n));
    }
  }
  Node pop() {
    if (!stack_.empty()) {
      Node n = std::move(stack_.back());
      stack_.pop_back();
      stack_min_.pop_back();
      return n;
    }
    Node n = heap_.top();
    heap_.pop();
    return n;
  }

  void accept(Candidate c) {
    if (c.objective < best_.objective) best_ = std::move(c);
  }

  std::vector<CountBox> boxes_for(std::span<const BoundChange> changes) const {
    std::vector<CountBox> boxes = root_;
    for (const BoundChange& c : changes) {
      CountBox& b = boxes[c.supply];
      if (c.fast) {
        if (c.lower) b.fcs_lo = std::max(b.fcs_lo, c.value);
        else b.fcs_hi = std::min(b.fcs_hi, c.value);
      } else {
        if (c.lower) b.scs_lo = std::max(b.scs_lo, c.value);
        else b.scs_hi = std::min(b.scs_hi, c.value);
      }
    }
    return boxes;
  }

  // Solves the node relaxation, picks a branching variable, and rounds the
  // relaxation to an integer placement. The rounding keeps the relaxation's
  // flow, so it is feasible as is; when it beats `cutoff` the transportation
  // problem is re-solved on it and unused chargers are trimmed.
  NodeEval evaluate(std::span<const BoundChange> changes, FlowNetwork& net,
                    double cutoff) const {
    NodeEval out;
    const std::size_t m = model_.supply_count();
    const auto boxes = boxes_for(changes);
    std::vector<CapacityEnvelope> env(m);
    double constant = 0.0;
    std::int64_t reach = 0;
    for (std::size_t j = 0; j < m; ++j) {
      env[j] = capacity_envelope(boxes[j], model_.slots()[j], model_.params());
      if (env[j].empty()) return out;
      constant += env[j].vertices.front().cost;
      reach += env[j].max_capacity();
    }
    if (reach < net.total_injected()) return out;
    if (!net.solve_envelopes(env)) return out;
    record_certificate(net, options_.verify_certificates, &out.stats);
    out.feasible = true;
    out.bound =
        std::max(constant, net.total_cost() + constant - perturbation_);

    const auto used = net.supply_usage();
    double best_frac = 1e-9;
    std::vector<int> cover_s(m), cover_f(m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto [s, f] = env[j].counts_at(used[j]);
      const double fs = std::min(s - std::floor(s), std::ceil(s) - s);
      const double ff = std::min(f - std::floor(f), std::ceil(f) - f);
      if (fs > best_frac) {
        best_frac = fs;
        out.branch_supply = static_cast<std::int32_t>(j);
        out.branch_fast = false;
        out.branch_value = s;
      }
      if (ff > best_frac) {
        best_frac = ff;
        out.branch_supply = static_cast<std::int32_t>(j);
        out.branch_fast = true;
        out.branch_value = f;
      }
      const auto cover =
          cheapest_cover(root_[j], model_.slots()[j], model_.params(), used[j]);
      cover_s[j] = cover->first;
      cover_f[j] = cover->second;
    }
    const double transport = net.transport_cost();
    const double estimate =
        transport + infrastructure_cost(cover_s, cover_f, model_.params().gamma,
                                        model_.params().r);
    if (estimate < cutoff) {
      out.candidate = polish(net, std::move(cover_s), std::move(cover_f),
                             &out.stats);
    }
    return out;
  }

  // Fix-and-resolve dive from the root: each round fixes the most decided
  // quarter of the fractional counts to their nearer integer and re-solves,
  // until the relaxation is integral or infeasible.
  void dive(std::chrono::steady_clock::time_point start, double lp_seconds) {
    FlowNetwork& net = *networks_[0];
    const std::size_t m = model_.supply_count();
    std::vector<CountBox> boxes = root_;
    std::vector<CapacityEnvelope> env(m);
    while (seconds_since(start) + 2.0 * lp_seconds <
           options_.time_limit_seconds) {
      std::int64_t reach = 0;
      for (std::size_t j = 0; j < m; ++j) {
        env[j] =
            capacity_envelope(boxes[j], model_.slots()[j], model_.params());
        if (env[j].empty()) return;
        reach += env[j].max_capacity();
      }
      if (reach < net.total_injected() || !net.solve_envelopes(env)) return;
      record_certificate(net, options_.verify_certificates, &stats_);
      const auto used = net.supply_usage();

      struct Frac {
        double decided;  // distance of the fractional part from 1/2
        std::size_t supply;
        bool fast;
        double value;
      };
      std::vector<Frac> fr;
      std::vector<int> cover_s(m), cover_f(m);
      for (std::size_t j = 0; j < m; ++j) {
        const auto [s, f] = env[j].counts_at(used[j]);
        for (const auto& [fast, v] : {std::pair{false, s}, std::pair{true, f}}) {
          const double phi = v - std::floor(v);
          if (phi > 1e-9 && phi < 1.0 - 1e-9) {
            fr.push_back({std::abs(phi - 0.5), j, fast, v});
          }
        }
        const auto cover = cheapest_cover(root_[j], model_.slots()[j],
                                          model_.params(), used[j]);
        cover_s[j] = cover->first;
        cover_f[j] = cover->second;
      }
      const double estimate =
          net.transport_cost() +
          infrastructure_cost(cover_s, cover_f, model_.params().gamma,
                              model_.params().r);
      if (fr.empty() || estimate < best_.objective) {
        if (estimate < best_.objective) {
          accept(polish(net, std::move(cover_s), std::move(cover_f), &stats_));
        }
        if (fr.empty()) return;
      }
      std::stable_sort(fr.begin(), fr.end(), [](const Frac& a, const Frac& b) {
        return a.decided > b.decided;
      });
      const std::size_t take = std::max<std::size_t>(1, (fr.size() + 3) / 4);
      for (std::size_t k = 0; k < take; ++k) {
        CountBox& b = boxes[fr[k].supply];
        const double v = fr[k].value;
        const bool up = v - std::floor(v) >= 0.5;
        int& lo = fr[k].fast ? b.fcs_lo : b.scs_lo;
        int& hi = fr[k].fast ? b.fcs_hi : b.scs_hi;
        if (up) lo = static_cast<int>(std::ceil(v));
        else hi = static_cast<int>(std::floor(v));
      }
    }
  }

  Candidate polish(FlowNetwork& net, std::vector<int> n_scs,
                   std::vector<int> n_fcs, SolveStats* stats) const {
    // The relaxation's own flow is feasible for the rounded counts; keep it
    // as the fallback.
    Candidate c;
    c.assignment = net.assignment();
    c.transport_cost = customer_dissatisfaction(
        c.assignment, model_.distances(), model_.params().alpha);
    c.n_scs = n_scs;
    c.n_fcs = n_fcs;
    trim(net.supply_usage(), &c);

    TransportationResult t = transport_on(net, model_, n_scs, n_fcs);
    record_certificate(net, options_.verify_certificates, stats);
    Candidate d;
    d.assignment = std::move(t.assignment);
    d.transport_cost = t.transport_cost;
    d.n_scs = std::move(n_scs);
    d.n_fcs = std::move(n_fcs);
    trim(net.supply_usage(), &d);
    return d.objective < c.objective ? std::move(d) : std::move(c);
  }

  // Replaces each supply's counts by the cheapest ones covering its usage.
  void trim(std::span<const std::int64_t> used, Candidate* c) const {
    for (std::size_t j = 0; j < used.size(); ++j) {
      const auto cover =
          cheapest_cover(root_[j], model_.slots()[j], model_.params(), used[j]);
      const double now =
          static_cast<double>(c->n_scs[j]) +
          model_.params().r * static_cast<double>(c->n_fcs[j]);
      const double alt =
          static_cast<double>(cover->first) +
          model_.params().r * static_cast<double>(cover->second);
      if (alt < now) {
        c->n_scs[j] = cover->first;
        c->n_fcs[j] = cover->second;
      }
    }
    c->objective = c->transport_cost +
                   infrastructure_cost(c->n_scs, c->n_fcs,
                                       model_.params().gamma,
                                       model_.params().r);
  }

  const PlacementModel& model_;
  MipOptions options_;
  std::vector<CountBox> root_;
  double path_cost_ = 0.0;
  double perturbation_ = 0.0;

  std::vector<std::unique_ptr<FlowNetwork>> networks_;
  std::vector<FlowNetwork*> free_;
  std::mutex mu_;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> heap_;
  std::vector<Node> stack_;
  std::vector<double> stack_min_;
  double pruned_min_ = std::numeric_limits<double>::infinity();
  std::uint64_t next_id_ = 0;
  std::int64_t node_count_ = 0;
  Candidate best_;
  SolveStats stats_;
};

}  // namespace detail

inline PlacementSolution solve_mip(const PlacementModel& model,
                                   const MipOptions& options = {}) {
  if (!(options.gap_tol > 0.0)) {
    throw InvalidArgument("gap tolerance must be positive");
  }
  if (!(options.time_limit_seconds > 0.0)) {
    throw InvalidArgument("time limit must be positive");
  }
  detail::BranchAndBound bb(model, options);
  return bb.run();
}

// Years are solved in order; each year's baseline is the previous year's
// counts, so chargers are never removed.
inline std::vector<PlacementSolution> solve_multi_year(
    std::shared_ptr<const DistanceMatrix> distances,
    const std::vector<std::vector<double>>& demand_by_year,
    const InfrastructureState& infra, const CostParams& params,
    const MipOptions& options = {}, std::span<const int> year_labels = {}) {
  if (demand_by_year.empty()) {
    throw InvalidArgument("at least one target year is required");
  }
  std::vector<PlacementSolution> out;
  InfrastructureState state = infra;
  for (std::size_t y = 0; y < demand_by_year.size(); ++y) {
    const std::string label =
        y < year_labels.size() ? std::to_string(year_labels[y])
                               : "#" + std::to_string(y);
    try {
      const PlacementModel model =
          build_model(distances, demand_by_year[y], state, params);
      out.push_back(solve_mip(model, options));
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("year " + label + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("year " + label + ": " + e.what());
    }
    for (std::size_t j = 0; j < state.size(); ++j) {
      state.supply_points[j].existing_scs = out.back().n_scs[j];
      state.supply_points[j].existing_fcs = out.back().n_fcs[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// solution.csv / assignment.csv
// ---------------------------------------------------------------------------

struct YearPlacement {
  int year = 0;
  std::vector<int> n_scs;
  std::vector<int> n_fcs;
  Assignment assignment;
};

inline void write_solution_csv(std::ostream& out,
                               std::span<const YearPlacement> placements) {
  out << "year,supply_point_index,n_scs,n_fcs\n";
  for (const YearPlacement& p : placements) {
    for (std::size_t j = 0; j < p.n_scs.size(); ++j) {
      out << p.year << ',' << j << ',' << p.n_scs[j] << ',' << p.n_fcs[j]
          << '\n';
    }
  }
}

inline void write_assignment_csv(std::ostream& out,
                                 std::span<const YearPlacement> placements) {
  out << "year,demand_point_index,supply_point_index,flow\n";
  for (const YearPlacement& p : placements) {
    for (const AssignmentEntry& e : p.assignment) {
      if (e.amount == 0.0) continue;
      out << p.year << ',' << e.demand << ',' << e.supply << ','
          << csv::format_double(e.amount) << '\n';
    }
  }
}

// Reads both files back. Years come out in file order of solution.csv; each
// year must list supply indices 0..M-1 exactly once.
inline std::vector<YearPlacement> parse_placements(std::istream& solution,
                                                   std::istream& assignment) {
  std::vector<YearPlacement> out;
  std::map<int, std::size_t> slot;
  {
    const auto lines = csv::read_lines(solution);
    if (lines.empty() ||
        csv::trim(lines[0].text) != "year,supply_point_index,n_scs,n_fcs") {
      throw ParseError(lines.empty() ? 0 : lines[0].number,
                       "expected header year,supply_point_index,n_scs,n_fcs");
    }
    std::vector<std::vector<char>> seen;
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const auto fields = csv::split(lines[k].text);
      if (fields.size() != 4) {
        throw ParseError(lines[k].number, "malformed row: expected 4 fields");
      }
      const int year = static_cast<int>(csv::parse_int(fields[0], lines[k].number, "year"));
      const int j = static_cast<int>(csv::parse_int(fields[1], lines[k].number, "supply_point_index"));
      const int s = static_cast<int>(csv::parse_int(fields[2], lines[k].number, "n_scs"));
      const int f = static_cast<int>(csv::parse_int(fields[3], lines[k].number, "n_fcs"));
      if (j < 0) throw ParseError(lines[k].number, "negative supply index");
      auto it = slot.find(year);
      if (it == slot.end()) {
        it = slot.emplace(year, out.size()).first;
        out.push_back({year, {}, {}, {}});
        seen.emplace_back();
      }
      YearPlacement& p = out[it->second];
      auto& mark = seen[it->second];
      if (static_cast<std::size_t>(j) >= p.n_scs.size()) {
        p.n_scs.resize(j + 1, 0);
        p.n_fcs.resize(j + 1, 0);
        mark.resize(j + 1, 0);
      }
      if (mark[j]) {
        throw ParseError(lines[k].number, "duplicate supply point index " +
                                              std::to_string(j) + " in year " +
                                              std::to_string(year));
      }
      mark[j] = 1;
      p.n_scs[j] = s;
      p.n_fcs[j] = f;
    }
    for (std::size_t y = 0; y < out.size(); ++y) {
      for (char c : seen[y]) {
        if (!c) {
          throw ParseError(0, "missing supply point index in year " +
                                  std::to_string(out[y].year));
        }
      }
    }
  }
  const auto lines = csv::read_lines(assignment);
  if (lines.empty() ||
      csv::trim(lines[0].text) !=
          "year,demand_point_index,supply_point_index,flow") {
    throw ParseError(
        lines.empty() ? 0 : lines[0].number,
        "expected header year,demand_point_index,supply_point_index,flow");
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto fields = csv::split(lines[k].text);
    if (fields.size() != 4) {
      throw ParseError(lines[k].number, "malformed row: expected 4 fields");
    }
    const int year = static_cast<int>(csv::parse_int(fields[0], lines[k].number, "year"));
    const int i = static_cast<int>(csv::parse_int(fields[1], lines[k].number, "demand_point_index"));
    const int j = static_cast<int>(csv::parse_int(fields[2], lines[k].number, "supply_point_index"));
    const double v = csv::parse_double(fields[3], lines[k].number, "flow");
    const auto it = slot.find(year);
    if (it == slot.end()) {
      throw ParseError(lines[k].number,
                       "assignment for year " + std::to_string(year) +
                           " which has no solution rows");
    }
    if (i < 0 || j < 0) throw ParseError(lines[k].number, "negative index");
    out[it->second].assignment.push_back(
        {static_cast<std::size_t>(i), static_cast<std::size_t>(j), v});
  }
  for (YearPlacement& p : out) {
    std::stable_sort(p.assignment.begin(), p.assignment.end(),
                     [](const AssignmentEntry& a, const AssignmentEntry& b) {
                       return std::tie(a.demand, a.supply) <
                              std::tie(b.demand, b.supply);
                     });
  }
  return out;
}

}  // namespace evplace

#endif  // EVPLACE_OPTIMIZER_HPP_
