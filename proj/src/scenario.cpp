// SPDX-License-Identifier: Apache-2.0

#include "sfma/scenario.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sfma/rng.hpp"

namespace sfma {

void SystemBudgets::validate() const {
  auto require_pos = [](double v, const char* name) {
    if (!(v > 0.0)) {
      throw std::invalid_argument(std::string(name) + " must be strictly positive");
    }
  };
  require_pos(total_power_watts, "total_power_watts");
  require_pos(total_bandwidth_hz, "total_bandwidth_hz");
  require_pos(max_latency_s, "max_latency_s");
  require_pos(energy_budget_j, "energy_budget_j");
  require_pos(noise_psd_w_per_hz, "noise_psd_w_per_hz");
  require_pos(distortion_max, "distortion_max");
  require_pos(comp_energy_coeff_j, "comp_energy_coeff_j");
  require_pos(bs_cpu_hz, "bs_cpu_hz");
  require_pos(user_cpu_hz, "user_cpu_hz");
  require_pos(bs_cycles, "bs_cycles");
  require_pos(dec_cycles, "dec_cycles");
  require_pos(source_bits, "source_bits");
  if (!(delta_min > 0.0 && delta_min <= 1.0)) {
    throw std::invalid_argument("delta_min must lie in (0, 1]");
  }
  if (!(max_latency_s > bs_latency_s() + dec_latency_s())) {
    throw std::invalid_argument(
        "max_latency_s must exceed compute latency so a residual "
        "transmission budget exists");
  }
}

std::vector<Position> drop_users(int n, double cell_radius_m, std::uint64_t seed) {
  if (n <= 0 || n % 2 != 0) {
    throw std::invalid_argument("number of users must be positive and even");
  }
  if (!(cell_radius_m >= 0.0)) {
    throw std::invalid_argument("cell radius must be nonnegative");
  }
  Rng rng(derive_seed(seed, /*tag=*/0x706f73));  // "pos"
  std::vector<Position> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    // r = R*sqrt(u) makes the density uniform over area, not radius.
    const double r = cell_radius_m * std::sqrt(rng.uniform());
    const double theta = 2.0 * M_PI * rng.uniform();
    out.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  return out;
}

double path_loss_db(double distance_km, double min_distance_km) {
  const double d = std::max(distance_km, min_distance_km);
  if (!(d > 0.0)) {
    throw std::invalid_argument("distance must be positive after clamping");
  }
  return 128.1 + 37.6 * std::log10(d);
}

double channel_gain_sq(double path_loss_db, double shadow_db) {
  return std::pow(10.0, -(path_loss_db + shadow_db) / 10.0);
}

Scenario make_scenario(const ScenarioParams& params, std::uint64_t seed) {
  params.budgets.validate();
  Scenario sc;
  sc.num_users = params.num_users;
  sc.rng_seed = seed;
  sc.budgets = params.budgets;
  sc.positions = drop_users(params.num_users, params.cell_radius_m, seed);

  Rng shadow_rng(derive_seed(seed, /*tag=*/0x736861));  // "sha"
  sc.channel_gain_sq.resize(params.num_users);
  for (int u = 0; u < params.num_users; ++u) {
    const double dist_km =
        std::hypot(sc.positions[u].x, sc.positions[u].y) / 1000.0;
    const double pl = path_loss_db(dist_km, params.min_distance_km);
    const double shadow = params.shadow_sigma_db > 0.0
                              ? shadow_rng.normal(0.0, params.shadow_sigma_db)
                              : 0.0;
    sc.channel_gain_sq(u) = channel_gain_sq(pl, shadow);
  }
  sc.distortion_max =
      Eigen::VectorXd::Constant(params.num_users, params.budgets.distortion_max);
  sc.source_bits =
      Eigen::VectorXd::Constant(params.num_users, params.budgets.source_bits);
  sc.dec_latency_s =
      Eigen::VectorXd::Constant(params.num_users, params.budgets.dec_latency_s());
  return sc;
}

}  // namespace sfma
