// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "sfma/rng.hpp"
#include "sfma/scenario.hpp"
#include "sfma/units.hpp"

using namespace sfma;

TEST_CASE("dbm conversion anchors") {
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3));
  CHECK(dbm_to_watts(-174.0) == doctest::Approx(3.981e-21).epsilon(1e-3));
  CHECK(watts_to_dbm(dbm_to_watts(17.3)) == doctest::Approx(17.3));
}

TEST_CASE("path loss formula") {
  CHECK(path_loss_db(1.0) == doctest::Approx(128.1));
  CHECK(path_loss_db(0.1) == doctest::Approx(90.5));
  CHECK(path_loss_db(0.25) == doctest::Approx(105.463).epsilon(1e-4));
  // Clamped below the minimum distance.
  CHECK(path_loss_db(0.001) == path_loss_db(0.01));
  CHECK_THROWS(path_loss_db(0.0, 0.0));
}

TEST_CASE("path loss is strictly increasing in distance") {
  double prev = path_loss_db(0.01);
  for (double d = 0.02; d <= 0.5; d += 0.01) {
    const double cur = path_loss_db(d);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("channel gain conversion") {
  CHECK(channel_gain_sq(100.0, 0.0) == doctest::Approx(1e-10));
  CHECK(channel_gain_sq(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(channel_gain_sq(90.0, 4.0) > 0.0);
}

TEST_CASE("drop_users basics") {
  const auto pos = drop_users(10, 250.0, 7);
  REQUIRE(pos.size() == 10);
  for (const auto& p : pos) {
    CHECK(std::hypot(p.x, p.y) <= 250.0 + 1e-9);
  }
  CHECK_THROWS(drop_users(9, 250.0, 7));

  // Degenerate disk collapses to the origin.
  const auto tiny = drop_users(2, 1e-9, 3);
  for (const auto& p : tiny) {
    CHECK(std::hypot(p.x, p.y) <= 1e-9);
  }
}

TEST_CASE("drop_users is deterministic per seed") {
  const auto a = drop_users(8, 250.0, 42);
  const auto b = drop_users(8, 250.0, 42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
  }
  const auto c = drop_users(8, 250.0, 43);
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) {
    any_diff = any_diff || a[i].x != c[i].x;
  }
  CHECK(any_diff);
}

TEST_CASE("disk sampling is area uniform: mean r^2 = R^2/2") {
  const double radius = 250.0;
  const int n = 100000;
  const auto pos = drop_users(n, radius, 11);
  double sum_r2 = 0.0;
  for (const auto& p : pos) sum_r2 += p.x * p.x + p.y * p.y;
  const double mean_r2 = sum_r2 / n;
  CHECK(mean_r2 == doctest::Approx(radius * radius / 2.0).epsilon(0.01));
}

TEST_CASE("scenario generation deterministic and positive gains") {
  ScenarioParams params;
  params.num_users = 10;
  const auto a = make_scenario(params, 99);
  const auto b = make_scenario(params, 99);
  CHECK(a.channel_gain_sq == b.channel_gain_sq);
  for (int u = 0; u < a.num_users; ++u) {
    CHECK(a.channel_gain_sq(u) > 0.0);
  }
  CHECK(a.num_groups() == 5);
  CHECK(a.residual_time_budget(0) == doctest::Approx(0.08));
}

TEST_CASE("zero shadow sigma makes gain purely distance dependent") {
  ScenarioParams params;
  params.num_users = 4;
  params.shadow_sigma_db = 0.0;
  const auto sc = make_scenario(params, 5);
  for (int u = 0; u < sc.num_users; ++u) {
    const double d_km =
        std::max(std::hypot(sc.positions[u].x, sc.positions[u].y) / 1000.0,
                 params.min_distance_km);
    const double expect = channel_gain_sq(path_loss_db(d_km), 0.0);
    CHECK(sc.channel_gain_sq(u) == doctest::Approx(expect));
  }
}

TEST_CASE("budget invariants validated") {
  SystemBudgets b;
  CHECK_NOTHROW(b.validate());
  b.delta_min = 0.0;
  CHECK_THROWS(b.validate());
  b.delta_min = 0.0625;
  b.max_latency_s = 0.015;  // below the 20 ms compute latency floor
  CHECK_THROWS(b.validate());
}
