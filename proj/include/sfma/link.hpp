// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sfma/profiles.hpp"
#include "sfma/scenario.hpp"

namespace sfma {

// Latency-infeasible transmissions carry an infinite delay. +inf propagates
// soundly through max/comparisons; code below guards the one 0*inf product.
inline constexpr double kInfiniteDelay = std::numeric_limits<double>::infinity();

struct UserPair {
  int i = 0;
  int j = 0;  // i < j

  friend bool operator==(const UserPair&, const UserPair&) = default;
  friend auto operator<=>(const UserPair&, const UserPair&) = default;
};

// Resources of one group plus its assigned pair.
struct GroupAllocation {
  UserPair pair;
  double power_w = 0.0;
  double bandwidth_hz = 0.0;
  double delta = 1.0;
};

struct PairMetrics {
  double sinr_i = 0.0, sinr_j = 0.0;
  double rate_i = 0.0, rate_j = 0.0;     // bit/s
  double sum_rate = 0.0;                 // pair sum rate
  double delay_i = 0.0, delay_j = 0.0;   // transmission delays, may be +inf
  double latency = 0.0;                  // end-to-end, may be +inf
  double energy = 0.0;                   // joules, may be +inf
};

// Gamma = (p/2)|h|^2 / (rho (p/2)|h|^2 + b N0).
double sinr(double power_w, double bandwidth_hz, double gain_sq, double rho,
            double noise_psd);

// R = b log2(1 + Gamma) with rho evaluated on the pair surface.
double user_rate(const RhoSurface& surface, double power_w, double bandwidth_hz,
                 double delta, double gain_sq, double noise_psd);

// t = Q delta / R; +inf when R <= 0.
double tx_delay(double source_bits, double delta, double rate_bps);

// T = tau_BS + max(t_i + tau_dec_i, t_j + tau_dec_j).
double e2e_latency(double delay_i, double delay_j, double bs_latency_s,
                   double dec_latency_i_s, double dec_latency_j_s);

// E = p max(t_i, t_j) + zeta ln(1/delta).
double group_energy(double power_w, double delta, double delay_i,
                    double delay_j, double comp_energy_coeff_j);

// T_bar = T_max - tau_BS - tau_dec; may be <= 0.
double residual_time_budget(const SystemBudgets& budgets);

// All physical quantities of one allocated group.
PairMetrics pair_metrics(const GroupAllocation& g, const Scenario& scenario,
                         const PairProfileSet& profiles);

// Pairing plus continuous resources plus cached per-group metrics.
struct AllocationState {
  std::vector<UserPair> pairing;  // one pair per group
  Eigen::VectorXd power_w;
  Eigen::VectorXd bandwidth_hz;
  Eigen::VectorXd delta;
  std::vector<PairMetrics> metrics;
  double objective = 0.0;  // cached sum of pair sum-rates

  int num_groups() const { return static_cast<int>(pairing.size()); }
  GroupAllocation group(int k) const {
    return {pairing[static_cast<size_t>(k)], power_w(k), bandwidth_hz(k),
            delta(k)};
  }
  // Recomputes metrics and the cached objective from scratch.
  void refresh(const Scenario& scenario, const PairProfileSet& profiles);
};

double objective(const AllocationState& state);

struct ConstraintCheck {
  std::string name;
  bool ok = true;
  double slack = 0.0;  // normalised by the corresponding budget where sensible
};

struct FeasibilityReport {
  std::vector<ConstraintCheck> checks;
  bool ok = true;

  const ConstraintCheck* find(const std::string& name) const;
};

// Evaluates every constraint of the allocation problem: per-user distortion,
// per-group latency, total energy, power/bandwidth budgets, delta range,
// pairing structure. Normalised absolute tolerance 1e-9.
FeasibilityReport check_feasible(const AllocationState& state,
                                 const Scenario& scenario,
                                 const PairProfileSet& profiles);

inline constexpr double kConstraintTol = 1e-9;

}  // namespace sfma
