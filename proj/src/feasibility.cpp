// SPDX-License-Identifier: Apache-2.0

#include "sfma/feasibility.hpp"

#include "sfma/matching.hpp"

namespace sfma {

const FeasibleEdge* FeasibleEdgeSet::find(const UserPair& p) const {
  for (const auto& e : edges) {
    if (e.pair == p) return &e;
  }
  return nullptr;
}

FeasibleEdgeSet static_prune(const Scenario& scenario,
                             const PairProfileSet& profiles) {
  FeasibleEdgeSet out;
  const double delta_min = scenario.budgets.delta_min;
  for (const auto& prof : profiles.all()) {
    const double tb_i = scenario.residual_time_budget(prof.i);
    const double tb_j = scenario.residual_time_budget(prof.j);
    if (!(tb_i > 0.0) || !(tb_j > 0.0)) continue;
    const auto lb = pair_delta_lower_bound(prof, scenario.distortion_max(prof.i),
                                           scenario.distortion_max(prof.j),
                                           delta_min);
    if (!lb) continue;
    out.edges.push_back({{prof.i, prof.j}, *lb, tb_i, tb_j});
  }
  std::vector<std::pair<int, int>> plain;
  plain.reserve(out.edges.size());
  for (const auto& e : out.edges) plain.emplace_back(e.pair.i, e.pair.j);
  out.matchable = has_perfect_matching(scenario.num_users, plain);
  return out;
}

bool edge_dynamically_feasible(const FeasibleEdge& edge, double power_w,
                               double bandwidth_hz, double delta,
                               const Scenario& scenario,
                               const PairProfileSet& profiles) {
  if (delta < edge.delta_lower_bound) return false;
  const auto& prof = profiles.at(edge.pair.i, edge.pair.j);
  const auto& b = scenario.budgets;
  const double ri = user_rate(prof.rho, power_w, bandwidth_hz, delta,
                              scenario.channel_gain_sq(edge.pair.i),
                              b.noise_psd_w_per_hz);
  const double rj = user_rate(prof.rho, power_w, bandwidth_hz, delta,
                              scenario.channel_gain_sq(edge.pair.j),
                              b.noise_psd_w_per_hz);
  const double floor_i =
      scenario.source_bits(edge.pair.i) * delta / edge.time_budget_i;
  const double floor_j =
      scenario.source_bits(edge.pair.j) * delta / edge.time_budget_j;
  return ri >= floor_i && rj >= floor_j;
}

std::vector<FeasibleEdge> dynamic_edges(const FeasibleEdgeSet& edge_set,
                                        double power_w, double bandwidth_hz,
                                        double delta, const Scenario& scenario,
                                        const PairProfileSet& profiles) {
  std::vector<FeasibleEdge> out;
  for (const auto& e : edge_set.edges) {
    if (edge_dynamically_feasible(e, power_w, bandwidth_hz, delta, scenario,
                                  profiles)) {
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace sfma
