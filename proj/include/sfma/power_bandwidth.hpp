// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "sfma/link.hpp"
#include "sfma/profiles.hpp"
#include "sfma/scenario.hpp"

namespace sfma {

struct PbOptions {
  double eta1 = 0.1;              // acceptance threshold
  double eta2 = 0.75;             // expansion threshold
  double shrink = 0.5;            // kappa_sh
  double expand = 2.0;            // kappa_ex
  double radius_init_frac = 0.25; // Delta_k^0 = frac * p_k^0
  double stop_rel = 1e-4;         // eps_pb, relative accepted improvement
  int max_iters = 50;
  double radius_floor_frac = 1e-6;   // floor = frac * P_max
  double bandwidth_floor_hz = 1e3;   // keeps the rate expressions defined
  // Barrier solver knobs.
  double barrier_mu = 10.0;
  double duality_tol = 1e-8;
  double kkt_tol = 1e-6;
  int newton_iters = 80;
};

// First-order model of q(p) = p * rho(p, delta) around p_anchor.
double qhat(const RhoSurface& surface, double delta, double p_anchor, double p);

// Per-group surrogate coefficients frozen at the expansion point.
struct SurrogateGroup {
  UserPair pair;
  double delta = 0.0;
  double p0 = 0.0, b0 = 0.0;   // expansion point
  double q0 = 0.0;             // p0 * rho(p0, delta)
  double qg = 0.0;             // d(p rho)/dp at p0
  double gain_i = 0.0, gain_j = 0.0;
  double floor_i = 0.0, floor_j = 0.0;  // latency-induced rate floors
  // Subtracted concave term: value and gradient of r^- at the anchor.
  double rminus_i = 0.0, rminus_j = 0.0;
  Eigen::Vector2d grad_minus_i = Eigen::Vector2d::Zero();
  Eigen::Vector2d grad_minus_j = Eigen::Vector2d::Zero();
};

struct SurrogateModel {
  std::vector<SurrogateGroup> groups;
  double noise_psd = 0.0;
  double p_max = 0.0, b_max = 0.0, b_floor = 0.0;
  double e_max = 0.0;
  Eigen::VectorXd energy_coeff;  // per-group p multiplier in the energy UB
  double energy_const = 0.0;     // sum of computation terms
  Eigen::VectorXd radius;        // trust radii
};

// Surrogate lower bound of one user's rate at (p, b). user must belong to
// the group's pair.
double surrogate_rate_bound(const SurrogateGroup& g, int user,
                            double noise_psd, double p, double b);

// Total surrogate objective at (p, b).
double surrogate_total(const SurrogateModel& model, const Eigen::VectorXd& p,
                       const Eigen::VectorXd& b);

SurrogateModel build_surrogate(const Scenario& scenario,
                               const PairProfileSet& profiles,
                               const std::vector<UserPair>& pairing,
                               const Eigen::VectorXd& delta,
                               const Eigen::VectorXd& p0,
                               const Eigen::VectorXd& b0,
                               const Eigen::VectorXd& radius,
                               const PbOptions& options);

struct SubproblemResult {
  bool ok = false;
  bool anchor_infeasible = false;  // no strictly interior start near the anchor
  Eigen::VectorXd p, b;
  double surrogate_value = 0.0;
  double kkt_residual = 0.0;  // normalised first-order residual
};

// Log-barrier interior scheme with damped Newton steps over the 2K scaled
// variables; geometric barrier reduction until the duality measure drops
// below options.duality_tol.
SubproblemResult solve_convex_subproblem(const SurrogateModel& model,
                                         const PbOptions& options);

// Actual-over-predicted improvement; nullopt signals a nonpositive
// predicted improvement (the caller breaks).
std::optional<double> trust_ratio(double true_candidate, double true_anchor,
                                  double surrogate_candidate,
                                  double surrogate_anchor);

struct PbResult {
  bool ok = false;  // false when the initial point is infeasible
  Eigen::VectorXd p, b;
  double objective = 0.0;
  std::vector<double> accepted_objectives;
  int iters = 0;
  std::string stop_reason;
};

// Algorithm loop: build surrogate, solve, ratio test, adapt radii. The
// candidate acceptance re-checks the exact models, so every accepted
// iterate is feasible for the fixed pairing and compression ratios.
PbResult optimize_power_bandwidth(const Scenario& scenario,
                                  const PairProfileSet& profiles,
                                  const std::vector<UserPair>& pairing,
                                  const Eigen::VectorXd& delta,
                                  const Eigen::VectorXd& p_init,
                                  const Eigen::VectorXd& b_init,
                                  const PbOptions& options = {});

}  // namespace sfma
