// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace sfma {

// Global system budgets and model constants shared by every group.
// All values linear SI.
struct SystemBudgets {
  double total_power_watts = 1.0;        // P_max (30 dBm)
  double total_bandwidth_hz = 10.0e6;    // B_max
  double max_latency_s = 0.1;            // T_max
  double energy_budget_j = 0.2;          // E_max
  double noise_psd_w_per_hz = 3.9810717055349694e-21;  // N0 (-174 dBm/Hz)
  double distortion_max = 0.005;         // D_u^max, identical per user by default
  double delta_min = 0.0625;             // lowest admissible compression ratio
  double comp_energy_coeff_j = 5.0e-3;   // zeta
  double bs_cpu_hz = 10.0e9;             // f_BS
  double user_cpu_hz = 1.0e9;            // f_u
  double bs_cycles = 1.0e8;              // encode load -> tau_BS = 10 ms
  double dec_cycles = 1.0e7;             // decode load -> tau_dec = 10 ms
  double source_bits = 1572864.0;        // Q_u (256x256 RGB @ 8 bit)

  double bs_latency_s() const { return bs_cycles / bs_cpu_hz; }
  double dec_latency_s() const { return dec_cycles / user_cpu_hz; }

  // Throws std::invalid_argument when any invariant is violated.
  void validate() const;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
};

// One Monte Carlo draw: user geometry and channel gains, immutable after
// construction and safe to share across worker threads. The per-user
// vectors default to the scalar budget values but may differ per user.
struct Scenario {
  int num_users = 0;                 // N, even
  std::vector<Position> positions;   // within the cell disk
  Eigen::VectorXd channel_gain_sq;   // |h_u|^2, linear
  Eigen::VectorXd distortion_max;    // D_u^max
  Eigen::VectorXd source_bits;       // Q_u
  Eigen::VectorXd dec_latency_s;     // tau_u^dec
  std::uint64_t rng_seed = 0;
  SystemBudgets budgets;

  int num_groups() const { return num_users / 2; }

  // T_bar_u = T_max - tau_BS - tau_u^dec; may be <= 0.
  double residual_time_budget(int u) const {
    return budgets.max_latency_s - budgets.bs_latency_s() - dec_latency_s(u);
  }
};

struct ScenarioParams {
  int num_users = 10;
  double cell_radius_m = 250.0;
  double min_distance_km = 0.01;   // clamp below to avoid the path-loss pole
  double shadow_sigma_db = 4.0;
  SystemBudgets budgets;
};

// Area-uniform positions on the disk of the given radius. n must be even.
std::vector<Position> drop_users(int n, double cell_radius_m, std::uint64_t seed);

// 128.1 + 37.6 lg d, d in km, clamped below at min_distance_km.
double path_loss_db(double distance_km, double min_distance_km = 0.01);

// |h|^2 = 10^(-(PL + shadow)/10), strictly positive.
double channel_gain_sq(double path_loss_db, double shadow_db);

// Full draw: positions, shadowing, gains. Deterministic per seed.
Scenario make_scenario(const ScenarioParams& params, std::uint64_t seed);

}  // namespace sfma
