// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "sfma/feasibility.hpp"
#include "sfma/link.hpp"

namespace sfma {

struct DeltaOptions {
  int grid_points = 32;          // coarse seeds per group
  double newton_tol = 1e-6;      // |step| convergence, delta units
  int newton_iters = 40;
  double energy_gap_rel = 1e-3;  // dual stop: |sum E - E_max| < rel * E_max
  int max_dual_iters = 200;
  double step_scale = 0.5;       // subgradient step base, objective-normalised
};

struct DeltaInterval {
  double lo = 0.0;
  double hi = 1.0;
};

struct DeltaResult {
  bool feasible = false;        // every group had a nonempty interval
  Eigen::VectorXd delta;
  double lambda = 0.0;
  int dual_iters = 0;
  double last_energy_gap = 0.0;   // sum E - E_max at the terminal dual iterate
  bool energy_projected = false;  // primal recovery shrank the vector
  bool energy_violated = false;   // budget unreachable anywhere in the box
};

// Rate + latency pieces of one group's scalar problem.

// R_bar(p, b, delta) - lambda * E(p, b, delta), exact max-form energy.
double group_delta_objective(const Scenario& scenario,
                             const PairProfileSet& profiles,
                             const UserPair& pair, double power_w,
                             double bandwidth_hz, double delta, double lambda);

// Sum over the pair of the analytic d rate / d delta.
double group_rate_derivative(const Scenario& scenario,
                             const PairProfileSet& profiles,
                             const UserPair& pair, double power_w,
                             double bandwidth_hz, double delta);

// d E / d delta using the latency-dominant user of the max term.
double group_energy_derivative(const Scenario& scenario,
                               const PairProfileSet& profiles,
                               const UserPair& pair, double power_w,
                               double bandwidth_hz, double delta);

// Intersection of [delta_lb, 1] with the latency-feasible set, located by a
// coarse scan plus bisection on T(delta) - T_max. nullopt when empty.
std::optional<DeltaInterval> feasible_delta_interval(
    const Scenario& scenario, const PairProfileSet& profiles,
    const UserPair& pair, double delta_lb, double power_w,
    double bandwidth_hz);

// Safeguarded 1-D solve: Newton on the stationarity condition per smooth
// piece (pieces split where the latency-dominant user switches), clipped to
// the interval; returns the best of Newton roots, the seed, and endpoints.
double newton_refine(const Scenario& scenario, const PairProfileSet& profiles,
                     const UserPair& pair, double power_w, double bandwidth_hz,
                     const DeltaInterval& interval, double delta_init,
                     double lambda, const DeltaOptions& options);

// lambda' = max(0, lambda + step * (total_energy - e_max)).
double dual_energy_update(double lambda, double step, double total_energy,
                          double e_max);

// Algorithm wrapper: dual loop with grid+Newton inner solves, complementary
// slackness exit, iteration cap, and primal recovery. Returns the best
// energy-feasible iterate seen (the incoming delta seeds the tracker).
DeltaResult optimize_delta(const Scenario& scenario,
                           const PairProfileSet& profiles,
                           const FeasibleEdgeSet& edge_set,
                           const std::vector<UserPair>& pairing,
                           const Eigen::VectorXd& power_w,
                           const Eigen::VectorXd& bandwidth_hz,
                           const Eigen::VectorXd& delta_in,
                           const DeltaOptions& options = {});

}  // namespace sfma
