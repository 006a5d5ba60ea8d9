// SPDX-License-Identifier: Apache-2.0

#include "sfma/link.hpp"

#include <cmath>
#include <stdexcept>

namespace sfma {

double sinr(double power_w, double bandwidth_hz, double gain_sq, double rho,
            double noise_psd) {
  if (!(bandwidth_hz > 0.0)) {
    throw std::invalid_argument("bandwidth must be positive");
  }
  const double signal = 0.5 * power_w * gain_sq;
  return signal / (rho * signal + bandwidth_hz * noise_psd);
}

double user_rate(const RhoSurface& surface, double power_w, double bandwidth_hz,
                 double delta, double gain_sq, double noise_psd) {
  const double rho = eval_rho(surface, power_w, delta);
  const double g = sinr(power_w, bandwidth_hz, gain_sq, rho, noise_psd);
  return bandwidth_hz * std::log2(1.0 + g);
}

double tx_delay(double source_bits, double delta, double rate_bps) {
  if (!(rate_bps > 0.0)) return kInfiniteDelay;
  return source_bits * delta / rate_bps;
}

double e2e_latency(double delay_i, double delay_j, double bs_latency_s,
                   double dec_latency_i_s, double dec_latency_j_s) {
  return bs_latency_s +
         std::max(delay_i + dec_latency_i_s, delay_j + dec_latency_j_s);
}

double group_energy(double power_w, double delta, double delay_i,
                    double delay_j, double comp_energy_coeff_j) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("delta must be positive");
  }
  const double t = std::max(delay_i, delay_j);
  if (std::isinf(t)) return kInfiniteDelay;  // avoid 0 * inf when p == 0
  return power_w * t + comp_energy_coeff_j * std::log(1.0 / delta);
}

double residual_time_budget(const SystemBudgets& budgets) {
  return budgets.max_latency_s - budgets.bs_latency_s() - budgets.dec_latency_s();
}

PairMetrics pair_metrics(const GroupAllocation& g, const Scenario& scenario,
                         const PairProfileSet& profiles) {
  const auto& b = scenario.budgets;
  const auto& prof = profiles.at(g.pair.i, g.pair.j);
  const double rho = eval_rho(prof.rho, g.power_w, g.delta);

  PairMetrics m;
  m.sinr_i = sinr(g.power_w, g.bandwidth_hz, scenario.channel_gain_sq(g.pair.i),
                  rho, b.noise_psd_w_per_hz);
  m.sinr_j = sinr(g.power_w, g.bandwidth_hz, scenario.channel_gain_sq(g.pair.j),
                  rho, b.noise_psd_w_per_hz);
  m.rate_i = g.bandwidth_hz * std::log2(1.0 + m.sinr_i);
  m.rate_j = g.bandwidth_hz * std::log2(1.0 + m.sinr_j);
  m.sum_rate = m.rate_i + m.rate_j;
  m.delay_i = tx_delay(scenario.source_bits(g.pair.i), g.delta, m.rate_i);
  m.delay_j = tx_delay(scenario.source_bits(g.pair.j), g.delta, m.rate_j);
  m.latency = e2e_latency(m.delay_i, m.delay_j, b.bs_latency_s(),
                          scenario.dec_latency_s(g.pair.i),
                          scenario.dec_latency_s(g.pair.j));
  m.energy = group_energy(g.power_w, g.delta, m.delay_i, m.delay_j,
                          b.comp_energy_coeff_j);
  return m;
}

void AllocationState::refresh(const Scenario& scenario,
                              const PairProfileSet& profiles) {
  const int k = num_groups();
  metrics.resize(static_cast<size_t>(k));
  objective = 0.0;
  for (int g = 0; g < k; ++g) {
    metrics[static_cast<size_t>(g)] = pair_metrics(group(g), scenario, profiles);
    objective += metrics[static_cast<size_t>(g)].sum_rate;
  }
}

double objective(const AllocationState& state) {
  double total = 0.0;
  for (const auto& m : state.metrics) total += m.sum_rate;
  return total;
}

const ConstraintCheck* FeasibilityReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

FeasibilityReport check_feasible(const AllocationState& state,
                                 const Scenario& scenario,
                                 const PairProfileSet& profiles) {
  const auto& b = scenario.budgets;
  const int k = state.num_groups();
  FeasibilityReport rep;
  auto add = [&rep](std::string name, double slack) {
    ConstraintCheck c;
    c.name = std::move(name);
    c.slack = slack;
    c.ok = slack >= -kConstraintTol;
    rep.checks.push_back(std::move(c));
  };

  // Pairing structure: one pair per group, every user exactly once.
  {
    std::vector<int> uses(static_cast<size_t>(scenario.num_users), 0);
    bool structural = k == scenario.num_groups();
    for (const auto& p : state.pairing) {
      if (p.i < 0 || p.j >= scenario.num_users || p.i >= p.j) {
        structural = false;
        continue;
      }
      ++uses[static_cast<size_t>(p.i)];
      ++uses[static_cast<size_t>(p.j)];
    }
    for (int u = 0; u < scenario.num_users; ++u) {
      if (uses[static_cast<size_t>(u)] != 1) structural = false;
    }
    ConstraintCheck c;
    c.name = "pairing_structure";
    c.ok = structural;
    c.slack = structural ? 0.0 : -1.0;
    rep.checks.push_back(std::move(c));
  }

  std::vector<PairMetrics> metrics(static_cast<size_t>(k));
  for (int g = 0; g < k; ++g) {
    metrics[static_cast<size_t>(g)] =
        pair_metrics(state.group(g), scenario, profiles);
  }

  // Per-user distortion via the envelopes of the hosting pair.
  for (int g = 0; g < k; ++g) {
    const auto& p = state.pairing[static_cast<size_t>(g)];
    const auto& prof = profiles.at(p.i, p.j);
    const double di = prof.env_i.value(state.delta(g));
    const double dj = prof.env_j.value(state.delta(g));
    add("distortion_user_" + std::to_string(p.i),
        (scenario.distortion_max(p.i) - di) / scenario.distortion_max(p.i));
    add("distortion_user_" + std::to_string(p.j),
        (scenario.distortion_max(p.j) - dj) / scenario.distortion_max(p.j));
  }

  // Per-group latency.
  for (int g = 0; g < k; ++g) {
    const double t = metrics[static_cast<size_t>(g)].latency;
    add("latency_group_" + std::to_string(g),
        std::isinf(t) ? -1.0 : (b.max_latency_s - t) / b.max_latency_s);
  }

  // Budgets.
  double energy = 0.0;
  for (const auto& m : metrics) energy += m.energy;
  add("energy_total", std::isinf(energy)
                          ? -1.0
                          : (b.energy_budget_j - energy) / b.energy_budget_j);
  add("power_total",
      (b.total_power_watts - state.power_w.sum()) / b.total_power_watts);
  add("bandwidth_total",
      (b.total_bandwidth_hz - state.bandwidth_hz.sum()) / b.total_bandwidth_hz);

  // Variable ranges.
  double range_slack = 0.0;
  for (int g = 0; g < k; ++g) {
    range_slack = std::min(range_slack, state.power_w(g));
    range_slack = std::min(range_slack, state.bandwidth_hz(g) > 0.0 ? 0.0 : -1.0);
    range_slack =
        std::min(range_slack, (state.delta(g) - b.delta_min) / b.delta_min);
    range_slack = std::min(range_slack, (1.0 - state.delta(g)));
  }
  add("variable_ranges", range_slack);

  rep.ok = true;
  for (const auto& c : rep.checks) rep.ok = rep.ok && c.ok;
  return rep;
}

}  // namespace sfma
