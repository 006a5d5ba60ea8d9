// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace sfma {

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double weight = 0.0;
};

// Exact maximum-weight perfect matching on a general graph with up to 18
// nodes, via dynamic programming over node subsets. Missing edges cannot be
// used. Returns nullopt when no perfect matching exists; throws on odd node
// counts. Deterministic: among equal-weight optima the partner scan order
// fixes the result.
std::optional<std::vector<std::pair<int, int>>> max_weight_perfect_matching(
    int num_nodes, const std::vector<WeightedEdge>& edges);

// True when the graph admits any perfect matching.
bool has_perfect_matching(int num_nodes,
                          const std::vector<std::pair<int, int>>& edges);

// Exact maximum-value square assignment: value(m, k) is the value of giving
// row m to column k, -inf marking forbidden cells. Returns, for each row,
// the chosen column; nullopt when no full assignment with finite value
// exists. Sizes up to 18.
std::optional<std::vector<int>> max_value_assignment(
    const std::vector<std::vector<double>>& value);

}  // namespace sfma
