// SPDX-License-Identifier: Apache-2.0

#include "sfma/compression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sfma {
namespace {

struct GroupEval {
  double rate_i = 0.0, rate_j = 0.0;
  double delay_i = 0.0, delay_j = 0.0;
  double latency = 0.0;
  double energy = 0.0;
  double sum_rate = 0.0;
};

GroupEval eval_group(const Scenario& sc, const PairProfileSet& profiles,
                     const UserPair& pair, double p, double b, double delta) {
  GroupEval ev;
  const auto& prof = profiles.at(pair.i, pair.j);
  const auto& bud = sc.budgets;
  ev.rate_i = user_rate(prof.rho, p, b, delta, sc.channel_gain_sq(pair.i),
                        bud.noise_psd_w_per_hz);
  ev.rate_j = user_rate(prof.rho, p, b, delta, sc.channel_gain_sq(pair.j),
                        bud.noise_psd_w_per_hz);
  ev.sum_rate = ev.rate_i + ev.rate_j;
  ev.delay_i = tx_delay(sc.source_bits(pair.i), delta, ev.rate_i);
  ev.delay_j = tx_delay(sc.source_bits(pair.j), delta, ev.rate_j);
  ev.latency = e2e_latency(ev.delay_i, ev.delay_j, bud.bs_latency_s(),
                           sc.dec_latency_s(pair.i), sc.dec_latency_s(pair.j));
  ev.energy = group_energy(p, delta, ev.delay_i, ev.delay_j,
                           bud.comp_energy_coeff_j);
  return ev;
}

double rate_derivative_single(const RhoSurface& surface, double p, double b,
                              double delta, double gain_sq, double n0) {
  const double rho = eval_rho(surface, p, delta);
  const double rho_prime = drho_ddelta(surface, p, delta);
  const double a = 0.5 * p * gain_sq;
  const double denom = rho * a + b * n0;
  const double gamma = a / denom;
  const double dgamma = -a * a / (denom * denom) * rho_prime;
  return b / std::log(2.0) * dgamma / (1.0 + gamma);
}

}  // namespace

double group_rate_derivative(const Scenario& sc, const PairProfileSet& profiles,
                             const UserPair& pair, double p, double b,
                             double delta) {
  const auto& prof = profiles.at(pair.i, pair.j);
  const double n0 = sc.budgets.noise_psd_w_per_hz;
  return rate_derivative_single(prof.rho, p, b, delta,
                                sc.channel_gain_sq(pair.i), n0) +
         rate_derivative_single(prof.rho, p, b, delta,
                                sc.channel_gain_sq(pair.j), n0);
}

double group_energy_derivative(const Scenario& sc,
                               const PairProfileSet& profiles,
                               const UserPair& pair, double p, double b,
                               double delta) {
  const auto ev = eval_group(sc, profiles, pair, p, b, delta);
  const auto& prof = profiles.at(pair.i, pair.j);
  const double n0 = sc.budgets.noise_psd_w_per_hz;
  // Latency-dominant user of the max term.
  const bool i_dominant = ev.delay_i >= ev.delay_j;
  const int u = i_dominant ? pair.i : pair.j;
  const double rate = i_dominant ? ev.rate_i : ev.rate_j;
  const double rate_prime = rate_derivative_single(
      prof.rho, p, b, delta, sc.channel_gain_sq(u), n0);
  const double q = sc.source_bits(u);
  // d/d delta [p q delta / R] = p q (R - delta R') / R^2
  const double comm = p * q * (rate - delta * rate_prime) / (rate * rate);
  const double comp = -sc.budgets.comp_energy_coeff_j / delta;
  return comm + comp;
}

double group_delta_objective(const Scenario& sc, const PairProfileSet& profiles,
                             const UserPair& pair, double p, double b,
                             double delta, double lambda) {
  const auto ev = eval_group(sc, profiles, pair, p, b, delta);
  return ev.sum_rate - lambda * ev.energy;
}

std::optional<DeltaInterval> feasible_delta_interval(
    const Scenario& sc, const PairProfileSet& profiles, const UserPair& pair,
    double delta_lb, double p, double b) {
  const double t_max = sc.budgets.max_latency_s;
  const double lo = std::max(delta_lb, sc.budgets.delta_min);
  if (lo > 1.0) return std::nullopt;
  auto latency_at = [&](double d) {
    return eval_group(sc, profiles, pair, p, b, d).latency;
  };
  if (latency_at(lo) > t_max) return std::nullopt;

  // Coarse scan for the last feasible point, then bisection on the boundary.
  const int scan = 64;
  double last_ok = lo;
  double first_bad = -1.0;
  for (int s = 1; s <= scan; ++s) {
    const double d = lo + (1.0 - lo) * s / scan;
    if (latency_at(d) <= t_max) {
      if (first_bad < 0.0) last_ok = d;
    } else if (first_bad < 0.0) {
      first_bad = d;
    }
  }
  if (first_bad < 0.0) return DeltaInterval{lo, 1.0};
  double a = last_ok, c = first_bad;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (a + c);
    (latency_at(mid) <= t_max ? a : c) = mid;
  }
  return DeltaInterval{lo, a};
}

double dual_energy_update(double lambda, double step, double total_energy,
                          double e_max) {
  return std::max(0.0, lambda + step * (total_energy - e_max));
}

namespace {

// Stationarity residual f(delta) = sum_u R'_u - lambda dE/d delta.
double stationarity(const Scenario& sc, const PairProfileSet& profiles,
                    const UserPair& pair, double p, double b, double delta,
                    double lambda) {
  return group_rate_derivative(sc, profiles, pair, p, b, delta) -
         lambda * group_energy_derivative(sc, profiles, pair, p, b, delta);
}

// Delta values inside (lo, hi) where the latency-dominant user switches.
std::vector<double> dominance_switches(const Scenario& sc,
                                       const PairProfileSet& profiles,
                                       const UserPair& pair, double p, double b,
                                       double lo, double hi) {
  std::vector<double> out;
  auto gap = [&](double d) {
    const auto ev = eval_group(sc, profiles, pair, p, b, d);
    return ev.delay_i - ev.delay_j;
  };
  const int scan = 32;
  double prev_d = lo;
  double prev_g = gap(lo);
  for (int s = 1; s <= scan; ++s) {
    const double d = lo + (hi - lo) * s / scan;
    const double g = gap(d);
    if (g == 0.0 || (g > 0.0) != (prev_g > 0.0)) {
      double a = prev_d, c = d;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + c);
        ((gap(mid) > 0.0) == (prev_g > 0.0) ? a : c) = mid;
      }
      out.push_back(0.5 * (a + c));
    }
    prev_d = d;
    prev_g = g;
  }
  return out;
}

}  // namespace

double newton_refine(const Scenario& sc, const PairProfileSet& profiles,
                     const UserPair& pair, double p, double b,
                     const DeltaInterval& interval, double delta_init,
                     double lambda, const DeltaOptions& options) {
  auto objective = [&](double d) {
    return group_delta_objective(sc, profiles, pair, p, b, d, lambda);
  };

  double best_delta = std::clamp(delta_init, interval.lo, interval.hi);
  double best_value = objective(best_delta);
  auto consider = [&](double d) {
    d = std::clamp(d, interval.lo, interval.hi);
    const double v = objective(d);
    if (v > best_value) {
      best_value = v;
      best_delta = d;
    }
  };
  consider(interval.lo);
  consider(interval.hi);

  // Newton runs once per smooth piece, started from the seed clipped into
  // the piece.
  std::vector<double> bounds{interval.lo};
  for (double s : dominance_switches(sc, profiles, pair, p, b, interval.lo,
                                     interval.hi)) {
    bounds.push_back(s);
  }
  bounds.push_back(interval.hi);

  const double seed = best_delta;
  for (size_t piece = 0; piece + 1 < bounds.size(); ++piece) {
    const double lo = bounds[piece];
    const double hi = bounds[piece + 1];
    if (hi - lo < 1e-12) continue;
    double x = std::clamp(seed, lo + 1e-9, hi - 1e-9);
    for (int it = 0; it < options.newton_iters; ++it) {
      const double f = stationarity(sc, profiles, pair, p, b, x, lambda);
      const double h = 1e-7;
      const double xl = std::max(lo, x - h);
      const double xr = std::min(hi, x + h);
      const double fprime =
          (stationarity(sc, profiles, pair, p, b, xr, lambda) -
           stationarity(sc, profiles, pair, p, b, xl, lambda)) /
          (xr - xl);
      if (fprime == 0.0 || !std::isfinite(fprime)) break;
      const double step = -f / fprime;
      double next = x + step;
      if (!std::isfinite(next)) break;
      next = std::clamp(next, lo, hi);
      const bool converged = std::abs(next - x) < options.newton_tol;
      x = next;
      if (converged) break;
    }
    consider(x);
  }
  return best_delta;
}

DeltaResult optimize_delta(const Scenario& sc, const PairProfileSet& profiles,
                           const FeasibleEdgeSet& edge_set,
                           const std::vector<UserPair>& pairing,
                           const Eigen::VectorXd& power_w,
                           const Eigen::VectorXd& bandwidth_hz,
                           const Eigen::VectorXd& delta_in,
                           const DeltaOptions& options) {
  const int k = static_cast<int>(pairing.size());
  const double e_max = sc.budgets.energy_budget_j;
  DeltaResult res;
  res.delta = delta_in;

  std::vector<DeltaInterval> intervals(static_cast<size_t>(k));
  for (int g = 0; g < k; ++g) {
    const auto* edge = edge_set.find(pairing[static_cast<size_t>(g)]);
    if (edge == nullptr) return res;  // pair not statically feasible
    auto iv = feasible_delta_interval(sc, profiles,
                                      pairing[static_cast<size_t>(g)],
                                      edge->delta_lower_bound, power_w(g),
                                      bandwidth_hz(g));
    if (!iv) return res;
    intervals[static_cast<size_t>(g)] = *iv;
  }
  res.feasible = true;

  auto total_energy = [&](const Eigen::VectorXd& delta) {
    double e = 0.0;
    for (int g = 0; g < k; ++g) {
      e += eval_group(sc, profiles, pairing[static_cast<size_t>(g)], power_w(g),
                      bandwidth_hz(g), delta(g))
               .energy;
    }
    return e;
  };
  auto total_rate = [&](const Eigen::VectorXd& delta) {
    double r = 0.0;
    for (int g = 0; g < k; ++g) {
      r += eval_group(sc, profiles, pairing[static_cast<size_t>(g)], power_w(g),
                      bandwidth_hz(g), delta(g))
               .sum_rate;
    }
    return r;
  };

  // Best energy-feasible iterate tracker, seeded with the incoming vector
  // when it lies inside all intervals.
  bool have_best = false;
  Eigen::VectorXd best_delta;
  double best_rate = -std::numeric_limits<double>::infinity();
  auto track = [&](const Eigen::VectorXd& delta) {
    if (total_energy(delta) > e_max * (1.0 + kConstraintTol)) return;
    const double r = total_rate(delta);
    if (r > best_rate) {
      best_rate = r;
      best_delta = delta;
      have_best = true;
    }
  };
  {
    bool inside = true;
    for (int g = 0; g < k; ++g) {
      const auto& iv = intervals[static_cast<size_t>(g)];
      inside = inside && delta_in(g) >= iv.lo - 1e-12 &&
               delta_in(g) <= iv.hi + 1e-12;
    }
    if (inside) track(delta_in);
  }

  Eigen::VectorXd delta = delta_in;
  for (int g = 0; g < k; ++g) {
    delta(g) = std::clamp(delta(g), intervals[static_cast<size_t>(g)].lo,
                          intervals[static_cast<size_t>(g)].hi);
  }
  // Subgradient scale: a full-budget violation moves lambda to the order of
  // objective / E_max.
  const double obj_scale = std::max(total_rate(delta), 1.0);
  const double beta0 = options.step_scale * obj_scale / (e_max * e_max);

  // Per-group Lagrangian solve at a fixed multiplier.
  auto solve_groups = [&](double lam) {
    Eigen::VectorXd d(k);
    for (int g = 0; g < k; ++g) {
      const auto& iv = intervals[static_cast<size_t>(g)];
      const auto& pair = pairing[static_cast<size_t>(g)];
      double seed = iv.lo;
      double seed_val = -std::numeric_limits<double>::infinity();
      const int m = std::max(options.grid_points, 2);
      for (int t = 0; t < m; ++t) {
        const double x = iv.lo + (iv.hi - iv.lo) * t / (m - 1);
        const double v = group_delta_objective(sc, profiles, pair, power_w(g),
                                               bandwidth_hz(g), x, lam);
        if (v > seed_val) {
          seed_val = v;
          seed = x;
        }
      }
      d(g) = newton_refine(sc, profiles, pair, power_w(g), bandwidth_hz(g), iv,
                           seed, lam, options);
    }
    return d;
  };

  double lambda = 0.0;
  int s = 0;
  double gap = 0.0;
  bool slack_budget = false;
  for (; s < options.max_dual_iters; ++s) {
    delta = solve_groups(lambda);
    track(delta);
    gap = total_energy(delta) - e_max;
    if (lambda == 0.0 && gap <= 0.0) {  // complementary slackness
      slack_budget = true;
      break;
    }
    if (std::abs(gap) < options.energy_gap_rel * e_max) break;
    lambda = dual_energy_update(lambda, beta0 / std::sqrt(s + 1.0),
                                gap + e_max, e_max);
  }
  res.dual_iters = s;

  if (!slack_budget) {
    // The single coupled constraint makes the dual one-dimensional, so a
    // bracketing bisection on lambda localises the complementary-slackness
    // point far faster than the diminishing subgradient tail.
    double lam_lo = 0.0;  // energy > budget side
    double lam_hi = std::max(lambda, obj_scale / e_max);
    bool bracketed = false;
    for (int d = 0; d < 60; ++d) {
      delta = solve_groups(lam_hi);
      track(delta);
      gap = total_energy(delta) - e_max;
      if (gap <= 0.0) {
        bracketed = true;
        break;
      }
      lam_lo = lam_hi;
      lam_hi *= 2.0;
    }
    if (bracketed) {
      // Collapse the bracket fully; each probe is one cheap grid+Newton
      // pass and the final delta resolution is limited only by newton_tol.
      for (int it = 0; it < 80 && lam_hi - lam_lo > 1e-12 * lam_hi; ++it) {
        const double mid = 0.5 * (lam_lo + lam_hi);
        delta = solve_groups(mid);
        track(delta);
        gap = total_energy(delta) - e_max;
        (gap > 0.0 ? lam_lo : lam_hi) = mid;
      }
      delta = solve_groups(lam_hi);
      track(delta);
      gap = total_energy(delta) - e_max;
      lambda = lam_hi;
    }
  }
  res.lambda = lambda;
  res.last_energy_gap = gap;

  if (total_energy(delta) > e_max && !have_best) {
    // Last resort: blend toward the per-group energy minimisers. If even
    // that point violates the budget, the sub-problem is energy-infeasible.
    res.energy_projected = true;
    Eigen::VectorXd emin(k);
    for (int g = 0; g < k; ++g) {
      const auto& iv = intervals[static_cast<size_t>(g)];
      const auto& pair = pairing[static_cast<size_t>(g)];
      double best_d = iv.lo;
      double best_e = std::numeric_limits<double>::infinity();
      for (int t = 0; t < 256; ++t) {
        const double x = iv.lo + (iv.hi - iv.lo) * t / 255.0;
        const double e = eval_group(sc, profiles, pair, power_w(g),
                                    bandwidth_hz(g), x)
                             .energy;
        if (e < best_e) {
          best_e = e;
          best_d = x;
        }
      }
      emin(g) = best_d;
    }
    auto blend = [&](double theta) {
      return (emin + theta * (delta - emin)).eval();
    };
    if (total_energy(blend(0.0)) > e_max) {
      res.energy_violated = true;
      delta = blend(0.0);
    } else {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total_energy(blend(mid)) <= e_max ? lo : hi) = mid;
      }
      delta = blend(lo);
      track(delta);
    }
  }

  res.delta = have_best ? best_delta : delta;
  return res;
}

}  // namespace sfma
