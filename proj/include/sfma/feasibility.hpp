// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "sfma/link.hpp"
#include "sfma/profiles.hpp"
#include "sfma/scenario.hpp"

namespace sfma {

struct FeasibleEdge {
  UserPair pair;
  double delta_lower_bound = 0.0;  // distortion-feasible lower bound
  double time_budget_i = 0.0;      // residual transmission budgets
  double time_budget_j = 0.0;
};

// Offline pruning result: pairs that can appear in some feasible solution.
struct FeasibleEdgeSet {
  std::vector<FeasibleEdge> edges;
  bool matchable = false;  // the pruned graph still admits a perfect matching

  const FeasibleEdge* find(const UserPair& p) const;
  bool contains(const UserPair& p) const { return find(p) != nullptr; }
};

// Keeps pairs with delta lower bound <= 1 and positive residual budgets for
// both users. matchable reports whether a perfect matching survives.
FeasibleEdgeSet static_prune(const Scenario& scenario,
                             const PairProfileSet& profiles);

// Pairs of the static set that, under (p_k, b_k, delta_k), satisfy the
// distortion lower bound and both users' latency-induced rate floors
// R_u >= Q_u delta / T_bar_u (inclusive comparisons).
std::vector<FeasibleEdge> dynamic_edges(const FeasibleEdgeSet& edge_set,
                                        double power_w, double bandwidth_hz,
                                        double delta, const Scenario& scenario,
                                        const PairProfileSet& profiles);

// Single-edge version of the dynamic screen.
bool edge_dynamically_feasible(const FeasibleEdge& edge, double power_w,
                               double bandwidth_hz, double delta,
                               const Scenario& scenario,
                               const PairProfileSet& profiles);

}  // namespace sfma
