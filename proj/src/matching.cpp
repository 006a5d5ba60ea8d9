// SPDX-License-Identifier: Apache-2.0

#include "sfma/matching.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sfma {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxNodes = 18;

int lowest_bit_index(unsigned mask) { return __builtin_ctz(mask); }
}  // namespace

std::optional<std::vector<std::pair<int, int>>> max_weight_perfect_matching(
    int num_nodes, const std::vector<WeightedEdge>& edges) {
  if (num_nodes < 0 || num_nodes % 2 != 0) {
    throw std::invalid_argument("perfect matching needs an even node count");
  }
  if (num_nodes > kMaxNodes) {
    throw std::invalid_argument("matching instance too large for exact DP");
  }
  if (num_nodes == 0) return std::vector<std::pair<int, int>>{};

  std::vector<std::vector<double>> w(
      static_cast<size_t>(num_nodes),
      std::vector<double>(static_cast<size_t>(num_nodes), kNegInf));
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= num_nodes || e.v >= num_nodes || e.u == e.v) {
      throw std::invalid_argument("matching edge endpoint out of range");
    }
    if (std::isinf(e.weight) && e.weight < 0.0) continue;
    auto& a = w[static_cast<size_t>(e.u)][static_cast<size_t>(e.v)];
    a = std::max(a, e.weight);
    w[static_cast<size_t>(e.v)][static_cast<size_t>(e.u)] = a;
  }

  const unsigned full = (1u << num_nodes) - 1u;
  std::vector<double> dp(full + 1u, kNegInf);
  dp[0] = 0.0;
  for (unsigned mask = 1; mask <= full; ++mask) {
    const int i = lowest_bit_index(mask);
    if (__builtin_popcount(mask) % 2 != 0) continue;
    for (int j = i + 1; j < num_nodes; ++j) {
      if (!(mask & (1u << j))) continue;
      const double wij = w[static_cast<size_t>(i)][static_cast<size_t>(j)];
      if (wij == kNegInf) continue;
      const double rest = dp[mask & ~(1u << i) & ~(1u << j)];
      if (rest == kNegInf) continue;
      dp[mask] = std::max(dp[mask], rest + wij);
    }
  }
  if (dp[full] == kNegInf) return std::nullopt;

  // Walk the table back to recover the pairs.
  std::vector<std::pair<int, int>> out;
  unsigned mask = full;
  while (mask != 0) {
    const int i = lowest_bit_index(mask);
    for (int j = i + 1; j < num_nodes; ++j) {
      if (!(mask & (1u << j))) continue;
      const double wij = w[static_cast<size_t>(i)][static_cast<size_t>(j)];
      if (wij == kNegInf) continue;
      const unsigned rest_mask = mask & ~(1u << i) & ~(1u << j);
      if (dp[rest_mask] == kNegInf) continue;
      // dp[mask] was produced by this exact sum, so == is reliable.
      if (dp[rest_mask] + wij == dp[mask]) {
        out.emplace_back(i, j);
        mask = rest_mask;
        break;
      }
    }
  }
  return out;
}

bool has_perfect_matching(int num_nodes,
                          const std::vector<std::pair<int, int>>& edges) {
  std::vector<WeightedEdge> we;
  we.reserve(edges.size());
  for (const auto& [u, v] : edges) we.push_back({u, v, 0.0});
  return max_weight_perfect_matching(num_nodes, we).has_value();
}

std::optional<std::vector<int>> max_value_assignment(
    const std::vector<std::vector<double>>& value) {
  const int n = static_cast<int>(value.size());
  if (n == 0) return std::vector<int>{};
  if (n > kMaxNodes) {
    throw std::invalid_argument("assignment instance too large for exact DP");
  }
  for (const auto& row : value) {
    if (static_cast<int>(row.size()) != n) {
      throw std::invalid_argument("assignment matrix must be square");
    }
  }

  // dp[mask] = best value assigning rows 0..popcount(mask)-1 to column set mask.
  const unsigned full = (1u << n) - 1u;
  std::vector<double> dp(full + 1u, kNegInf);
  dp[0] = 0.0;
  for (unsigned mask = 0; mask < full; ++mask) {
    if (dp[mask] == kNegInf) continue;
    const int row = __builtin_popcount(mask);
    for (int col = 0; col < n; ++col) {
      if (mask & (1u << col)) continue;
      const double v = value[static_cast<size_t>(row)][static_cast<size_t>(col)];
      if (v == kNegInf) continue;
      const unsigned next = mask | (1u << col);
      dp[next] = std::max(dp[next], dp[mask] + v);
    }
  }
  if (dp[full] == kNegInf) return std::nullopt;

  std::vector<int> cols(static_cast<size_t>(n), -1);
  unsigned mask = full;
  for (int row = n - 1; row >= 0; --row) {
    for (int col = 0; col < n; ++col) {
      if (!(mask & (1u << col))) continue;
      const double v = value[static_cast<size_t>(row)][static_cast<size_t>(col)];
      if (v == kNegInf) continue;
      const unsigned prev = mask & ~(1u << col);
      if (dp[prev] == kNegInf) continue;
      if (dp[prev] + v == dp[mask]) {
        cols[static_cast<size_t>(row)] = col;
        mask = prev;
        break;
      }
    }
  }
  return cols;
}

}  // namespace sfma
