// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "sfma/compression.hpp"
#include "sfma/rng.hpp"

using namespace sfma;

namespace {

struct Fixture {
  Scenario sc;
  PairProfileSet profiles;
  FeasibleEdgeSet edges;

  Fixture(int n, std::uint64_t seed, double e_max = 0.2)
      : sc([&] {
          ScenarioParams params;
          params.num_users = n;
          params.budgets.energy_budget_j = e_max;
          return make_scenario(params, seed);
        }()),
        profiles(synth_profiles(sc, ProfileGenParams{}, seed + 1000)),
        edges(static_prune(sc, profiles)) {}
};

Eigen::VectorXd equal_vector(int k, double v) {
  return Eigen::VectorXd::Constant(k, v);
}

std::vector<UserPair> adjacent_pairing(int n) {
  std::vector<UserPair> out;
  for (int g = 0; g < n / 2; ++g) out.push_back({2 * g, 2 * g + 1});
  return out;
}

}  // namespace

TEST_CASE("group objective: lambda = 0 equals the pair sum rate") {
  Fixture fx(6, 3);
  const UserPair pair{0, 1};
  const auto& prof = fx.profiles.at(0, 1);
  const double p = 0.2, b = 2e6, d = 0.3;
  const double expect =
      user_rate(prof.rho, p, b, d, fx.sc.channel_gain_sq(0),
                fx.sc.budgets.noise_psd_w_per_hz) +
      user_rate(prof.rho, p, b, d, fx.sc.channel_gain_sq(1),
                fx.sc.budgets.noise_psd_w_per_hz);
  CHECK(group_delta_objective(fx.sc, fx.profiles, pair, p, b, d, 0.0) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("group objective: huge lambda moves mass toward lower energy") {
  Fixture fx(6, 3);
  const UserPair pair{0, 1};
  const auto* e = fx.edges.find(pair);
  REQUIRE(e != nullptr);
  auto iv = feasible_delta_interval(fx.sc, fx.profiles, pair,
                                    e->delta_lower_bound, 0.2, 2e6);
  REQUIRE(iv.has_value());
  DeltaOptions opts;
  const double d_free =
      newton_refine(fx.sc, fx.profiles, pair, 0.2, 2e6, *iv, iv->hi, 0.0, opts);
  const double lambda_huge = 1e14;
  double seed = iv->lo;
  double best = -1e300;
  for (int t = 0; t < 64; ++t) {
    const double d = iv->lo + (iv->hi - iv->lo) * t / 63.0;
    const double v = group_delta_objective(fx.sc, fx.profiles, pair, 0.2, 2e6,
                                           d, lambda_huge);
    if (v > best) {
      best = v;
      seed = d;
    }
  }
  const double d_pen = newton_refine(fx.sc, fx.profiles, pair, 0.2, 2e6, *iv,
                                     seed, lambda_huge, opts);
  auto energy_at = [&](double d) {
    return pair_metrics({pair, 0.2, 2e6, d}, fx.sc, fx.profiles).energy;
  };
  CHECK(energy_at(d_pen) <= energy_at(d_free) + 1e-12);
}

TEST_CASE("group objective matches link-module recomputation") {
  Fixture fx(6, 3);
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto& e = fx.edges.edges[rng.below(fx.edges.edges.size())];
    const double p = rng.uniform(0.05, 0.5);
    const double b = rng.uniform(5e5, 3e6);
    const double d = rng.uniform(0.1, 1.0);
    const double lambda = rng.uniform(0.0, 1e8);
    const auto m = pair_metrics({e.pair, p, b, d}, fx.sc, fx.profiles);
    CHECK(group_delta_objective(fx.sc, fx.profiles, e.pair, p, b, d, lambda) ==
          doctest::Approx(m.sum_rate - lambda * m.energy).epsilon(1e-12));
  }
}

TEST_CASE("feasible interval: loose budget returns the full range") {
  Fixture fx(6, 3);
  auto iv = feasible_delta_interval(fx.sc, fx.profiles, {0, 1}, 0.2, 50.0, 1e9);
  REQUIRE(iv.has_value());
  CHECK(iv->lo == doctest::Approx(0.2));
  CHECK(iv->hi == doctest::Approx(1.0));
}

TEST_CASE("feasible interval: incompatible constraints come back empty") {
  Fixture fx(6, 3);
  // Starved radio resources make even the distortion floor latency-infeasible.
  auto iv = feasible_delta_interval(fx.sc, fx.profiles, {0, 1}, 0.9, 1e-6, 1e3);
  CHECK(!iv.has_value());
}

TEST_CASE("feasible interval boundary agrees with a dense grid scan") {
  Fixture fx(8, 5);
  Rng rng(9);
  for (int t = 0; t < 12; ++t) {
    const auto& e = fx.edges.edges[rng.below(fx.edges.edges.size())];
    const double p = rng.uniform(0.05, 0.4);
    const double b = rng.uniform(5e5, 3e6);
    auto iv = feasible_delta_interval(fx.sc, fx.profiles, e.pair,
                                      e.delta_lower_bound, p, b);
    const double lo = std::max(e.delta_lower_bound, fx.sc.budgets.delta_min);
    double grid_hi = -1.0;
    bool lo_ok = false;
    for (int s = 0; s < 10000; ++s) {
      const double d = lo + (1.0 - lo) * s / 9999.0;
      const auto m = pair_metrics({e.pair, p, b, d}, fx.sc, fx.profiles);
      const bool ok = m.latency <= fx.sc.budgets.max_latency_s;
      if (s == 0) lo_ok = ok;
      if (ok) {
        grid_hi = d;
      } else if (grid_hi >= 0.0) {
        break;  // end of the feasible prefix
      }
    }
    if (!iv.has_value()) {
      CHECK(!lo_ok);
      continue;
    }
    REQUIRE(lo_ok);
    CHECK(iv->hi == doctest::Approx(grid_hi).epsilon(1e-4));
  }
}

TEST_CASE("newton refine: lambda = 0 returns the interval upper end") {
  Fixture fx(6, 3);
  const auto& e = fx.edges.edges.front();
  const double p = 0.2, b = 2e6;
  auto iv = feasible_delta_interval(fx.sc, fx.profiles, e.pair,
                                    e.delta_lower_bound, p, b);
  REQUIRE(iv.has_value());
  DeltaOptions opts;
  const double d = newton_refine(fx.sc, fx.profiles, e.pair, p, b, *iv,
                                 0.5 * (iv->lo + iv->hi), 0.0, opts);
  // Rate is strictly increasing in delta, so the maximiser is the upper end.
  CHECK(d == doctest::Approx(iv->hi).epsilon(1e-9));
}

TEST_CASE("newton refine matches a 10,000-point grid argmax") {
  Fixture fx(8, 7);
  Rng rng(21);
  DeltaOptions opts;
  for (int t = 0; t < 50; ++t) {
    const auto& e = fx.edges.edges[rng.below(fx.edges.edges.size())];
    const double p = rng.uniform(0.05, 0.4);
    const double b = rng.uniform(5e5, 3e6);
    auto iv = feasible_delta_interval(fx.sc, fx.profiles, e.pair,
                                      e.delta_lower_bound, p, b);
    if (!iv.has_value()) continue;
    const double lambda = rng.uniform(0.0, 2e7);  // rate-per-joule scale
    double grid_best = -1e300, grid_arg = iv->lo;
    for (int s = 0; s < 10000; ++s) {
      const double d = iv->lo + (iv->hi - iv->lo) * s / 9999.0;
      const double v =
          group_delta_objective(fx.sc, fx.profiles, e.pair, p, b, d, lambda);
      if (v > grid_best) {
        grid_best = v;
        grid_arg = d;
      }
    }
    const double got = newton_refine(fx.sc, fx.profiles, e.pair, p, b, *iv,
                                     grid_arg, lambda, opts);
    const double got_val =
        group_delta_objective(fx.sc, fx.profiles, e.pair, p, b, got, lambda);
    const bool close_arg = std::abs(got - grid_arg) < 1e-4;
    const bool close_val =
        got_val >= grid_best - 1e-6 * std::max(1.0, std::abs(grid_best));
    CHECK((close_arg || close_val));
    // Starting at the grid argmax never loses objective.
    CHECK(got_val >=
          group_delta_objective(fx.sc, fx.profiles, e.pair, p, b, grid_arg,
                                lambda) -
              1e-12 * std::abs(grid_best));
  }
}

TEST_CASE("derivatives match central finite differences") {
  Fixture fx(8, 11);
  Rng rng(31);
  for (int t = 0; t < 40; ++t) {
    const auto& e = fx.edges.edges[rng.below(fx.edges.edges.size())];
    const double p = rng.uniform(0.05, 0.4);
    const double b = rng.uniform(5e5, 3e6);
    const double d = rng.uniform(0.15, 0.9);
    const double h = 1e-6;
    auto rate_at = [&](double x) {
      return pair_metrics({e.pair, p, b, x}, fx.sc, fx.profiles).sum_rate;
    };
    const double fd_rate = (rate_at(d + h) - rate_at(d - h)) / (2 * h);
    const double an_rate =
        group_rate_derivative(fx.sc, fx.profiles, e.pair, p, b, d);
    CHECK(an_rate == doctest::Approx(fd_rate).epsilon(1e-5));

    auto energy_at = [&](double x) {
      return pair_metrics({e.pair, p, b, x}, fx.sc, fx.profiles).energy;
    };
    const double fd_energy = (energy_at(d + h) - energy_at(d - h)) / (2 * h);
    const double an_energy =
        group_energy_derivative(fx.sc, fx.profiles, e.pair, p, b, d);
    CHECK(an_energy == doctest::Approx(fd_energy).epsilon(1e-5));
  }
}

TEST_CASE("dual update closed-form checks") {
  CHECK(dual_energy_update(1.0, 0.1, 2.0, 2.0) == doctest::Approx(1.0));
  CHECK(dual_energy_update(0.0, 0.1, 1.0, 2.0) == doctest::Approx(0.0));
  CHECK(dual_energy_update(1.0, 0.1, 4.0, 2.0) == doctest::Approx(1.2));
}

TEST_CASE("optimize_delta: slack budget keeps lambda at zero") {
  Fixture fx(6, 3, /*e_max=*/50.0);
  const int k = fx.sc.num_groups();
  const auto pairing = adjacent_pairing(fx.sc.num_users);
  const auto p = equal_vector(k, fx.sc.budgets.total_power_watts / k);
  const auto b = equal_vector(k, fx.sc.budgets.total_bandwidth_hz / k);
  const auto res = optimize_delta(fx.sc, fx.profiles, fx.edges, pairing, p, b,
                                  equal_vector(k, 0.5));
  REQUIRE(res.feasible);
  CHECK(res.lambda == 0.0);
  DeltaOptions opts;
  for (int g = 0; g < k; ++g) {
    const auto* e = fx.edges.find(pairing[static_cast<size_t>(g)]);
    REQUIRE(e != nullptr);
    auto iv = feasible_delta_interval(fx.sc, fx.profiles,
                                      pairing[static_cast<size_t>(g)],
                                      e->delta_lower_bound, p(g), b(g));
    REQUIRE(iv.has_value());
    const double free =
        newton_refine(fx.sc, fx.profiles, pairing[static_cast<size_t>(g)],
                      p(g), b(g), *iv, iv->hi, 0.0, opts);
    CHECK(res.delta(g) == doctest::Approx(free).epsilon(1e-9));
  }
}

TEST_CASE("optimize_delta: K=1 matches the constrained grid oracle") {
  for (int t = 0; t < 6; ++t) {
    Fixture fx(2, 100 + static_cast<std::uint64_t>(t), /*e_max=*/1.0);
    const std::vector<UserPair> pairing{{0, 1}};
    const auto p = equal_vector(1, fx.sc.budgets.total_power_watts);
    const auto b = equal_vector(1, fx.sc.budgets.total_bandwidth_hz);
    const auto* e = fx.edges.find({0, 1});
    REQUIRE(e != nullptr);
    auto iv = feasible_delta_interval(fx.sc, fx.profiles, {0, 1},
                                      e->delta_lower_bound, p(0), b(0));
    REQUIRE(iv.has_value());
    auto energy_at = [&](double d) {
      return pair_metrics({{0, 1}, p(0), b(0), d}, fx.sc, fx.profiles).energy;
    };
    auto rate_at = [&](double d) {
      return pair_metrics({{0, 1}, p(0), b(0), d}, fx.sc, fx.profiles).sum_rate;
    };
    DeltaOptions opts;
    const double d_free = newton_refine(fx.sc, fx.profiles, {0, 1}, p(0), b(0),
                                        *iv, iv->hi, 0.0, opts);
    // Tighten the budget so the energy constraint truly binds.
    fx.sc.budgets.energy_budget_j = 0.6 * energy_at(d_free);

    double oracle_rate = -1.0, oracle_delta = iv->lo;
    for (int s = 0; s < 10000; ++s) {
      const double d = iv->lo + (iv->hi - iv->lo) * s / 9999.0;
      if (energy_at(d) > fx.sc.budgets.energy_budget_j) continue;
      const double r = rate_at(d);
      if (r > oracle_rate) {
        oracle_rate = r;
        oracle_delta = d;
      }
    }
    if (oracle_rate < 0.0) continue;  // nothing feasible at this tightness

    const auto res = optimize_delta(fx.sc, fx.profiles, fx.edges, pairing, p, b,
                                    equal_vector(1, iv->lo));
    REQUIRE(res.feasible);
    CHECK(energy_at(res.delta(0)) <=
          fx.sc.budgets.energy_budget_j * (1.0 + 1e-9));
    CHECK(std::abs(res.delta(0) - oracle_delta) < 1e-4);
  }
}

TEST_CASE("optimize_delta output respects every interval") {
  Fixture fx(10, 17, /*e_max=*/0.2);
  const int k = fx.sc.num_groups();
  const auto pairing = adjacent_pairing(fx.sc.num_users);
  const auto p = equal_vector(k, fx.sc.budgets.total_power_watts / k);
  const auto b = equal_vector(k, fx.sc.budgets.total_bandwidth_hz / k);
  const auto res = optimize_delta(fx.sc, fx.profiles, fx.edges, pairing, p, b,
                                  equal_vector(k, 0.3));
  if (!res.feasible) return;
  for (int g = 0; g < k; ++g) {
    const auto* e = fx.edges.find(pairing[static_cast<size_t>(g)]);
    auto iv = feasible_delta_interval(fx.sc, fx.profiles,
                                      pairing[static_cast<size_t>(g)],
                                      e->delta_lower_bound, p(g), b(g));
    REQUIRE(iv.has_value());
    CHECK(res.delta(g) >= iv->lo - 1e-12);
    CHECK(res.delta(g) <= iv->hi + 1e-12);
  }
}

TEST_CASE("optimize_delta honours a binding energy budget") {
  Fixture fx(6, 23, /*e_max=*/0.2);
  const int k = fx.sc.num_groups();
  const auto pairing = adjacent_pairing(fx.sc.num_users);
  const auto p = equal_vector(k, fx.sc.budgets.total_power_watts / k);
  const auto b = equal_vector(k, fx.sc.budgets.total_bandwidth_hz / k);
  auto energy_of = [&](const Eigen::VectorXd& delta) {
    double e = 0.0;
    for (int g = 0; g < k; ++g) {
      e += pair_metrics({pairing[static_cast<size_t>(g)], p(g), b(g), delta(g)},
                        fx.sc, fx.profiles)
               .energy;
    }
    return e;
  };
  auto free = optimize_delta(fx.sc, fx.profiles, fx.edges, pairing, p, b,
                             equal_vector(k, 0.3));
  REQUIRE(free.feasible);
  // Budget between the box's energy floor and the unconstrained choice so
  // the constraint binds but stays satisfiable.
  double energy_floor = 0.0;
  for (int g = 0; g < k; ++g) {
    const auto* e = fx.edges.find(pairing[static_cast<size_t>(g)]);
    auto iv = feasible_delta_interval(fx.sc, fx.profiles,
                                      pairing[static_cast<size_t>(g)],
                                      e->delta_lower_bound, p(g), b(g));
    REQUIRE(iv.has_value());
    double emin = 1e300;
    for (int s = 0; s < 512; ++s) {
      const double d = iv->lo + (iv->hi - iv->lo) * s / 511.0;
      emin = std::min(
          emin, pair_metrics({pairing[static_cast<size_t>(g)], p(g), b(g), d},
                             fx.sc, fx.profiles)
                    .energy);
    }
    energy_floor += emin;
  }
  REQUIRE(energy_floor < energy_of(free.delta));
  fx.sc.budgets.energy_budget_j =
      energy_floor + 0.3 * (energy_of(free.delta) - energy_floor);
  const auto res = optimize_delta(fx.sc, fx.profiles, fx.edges, pairing, p, b,
                                  equal_vector(k, 0.3));
  REQUIRE(res.feasible);
  CHECK(!res.energy_violated);
  CHECK(res.lambda >= 0.0);
  CHECK(energy_of(res.delta) <= fx.sc.budgets.energy_budget_j * (1.0 + 1e-9));

  // Per-group optimality at the final multiplier against a dense grid.
  DeltaOptions opts;
  for (int g = 0; g < k; ++g) {
    const auto* e = fx.edges.find(pairing[static_cast<size_t>(g)]);
    auto iv = feasible_delta_interval(fx.sc, fx.profiles,
                                      pairing[static_cast<size_t>(g)],
                                      e->delta_lower_bound, p(g), b(g));
    REQUIRE(iv.has_value());
    double seed = iv->lo, seed_val = -1e300;
    for (int s = 0; s < 64; ++s) {
      const double d = iv->lo + (iv->hi - iv->lo) * s / 63.0;
      const double v = group_delta_objective(
          fx.sc, fx.profiles, pairing[static_cast<size_t>(g)], p(g), b(g), d,
          res.lambda);
      if (v > seed_val) {
        seed_val = v;
        seed = d;
      }
    }
    const double refined =
        newton_refine(fx.sc, fx.profiles, pairing[static_cast<size_t>(g)],
                      p(g), b(g), *iv, seed, res.lambda, opts);
    double grid_best = -1e300;
    for (int s = 0; s < 10000; ++s) {
      const double d = iv->lo + (iv->hi - iv->lo) * s / 9999.0;
      grid_best = std::max(
          grid_best, group_delta_objective(fx.sc, fx.profiles,
                                           pairing[static_cast<size_t>(g)],
                                           p(g), b(g), d, res.lambda));
    }
    const double got = group_delta_objective(
        fx.sc, fx.profiles, pairing[static_cast<size_t>(g)], p(g), b(g),
        refined, res.lambda);
    CHECK(got >= grid_best - 1e-6 * std::max(1.0, std::abs(grid_best)));
  }
}
