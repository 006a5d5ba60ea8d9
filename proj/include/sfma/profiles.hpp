// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sfma/envelope.hpp"
#include "sfma/rho.hpp"
#include "sfma/scenario.hpp"

namespace sfma {

// Knobs of the synthetic offline profiler. Similarity drives both the
// interference saturation levels and the distortion curves: similar pairs
// separate well (low rho, low distortion), dissimilar pairs do not.
struct ProfileGenParams {
  bool cluster_mode = true;   // latent content clusters vs i.i.d. similarity
  int num_clusters = 3;
  double intra_s_lo = 0.75, intra_s_hi = 0.95;
  double inter_s_lo = 0.05, inter_s_hi = 0.45;

  // rho_min = rho_lo + (1-s) * rho_lo_spread, rho_max analogous.
  double rho_lo = 0.03, rho_lo_spread = 0.25;
  double rho_hi_base = 0.50, rho_hi_spread = 0.45;
  // Inflates (rho_min, rho_max) post-mapping; emulates a weaker transceiver
  // family when > 1.
  double family_multiplier = 1.0;

  double a_lo = 10.0, a_hi = 40.0;  // per-watt slope range (log-uniform)
  double b_lo = 2.0, b_hi = 8.0;    // per-unit-delta slope range (log-uniform)
  // Sigmoid midpoint location; p_mid_watts < 0 means P_max / (2K).
  double p_mid_watts = -1.0;
  double delta_mid = 0.4;

  // Distortion template: end value at delta = 1, start value at delta_min,
  // curvature, and similarity-driven inflation of slope and floor.
  double dist_start = 6.0e-3;
  double dist_end = 1.5e-3;
  double dist_gamma = 2.0;
  double dist_mismatch = 0.5;
  double dist_floor_mismatch = 0.2;
  double dist_noise = 0.04;  // relative amplitude of uniform sample noise

  std::vector<double> delta_grid = {0.0625, 0.125, 0.25, 0.375, 0.5, 0.75, 1.0};

  void validate() const;
};

struct PairProfile {
  int i = 0;
  int j = 0;                 // i < j
  double similarity = 0.0;   // s in [0, 1]
  RhoSurface rho;
  DistortionEnvelope env_i;  // distortion envelope of user i under this pair
  DistortionEnvelope env_j;
};

// One profile per candidate pair (i, j), i < j. Immutable after creation.
class PairProfileSet {
 public:
  PairProfileSet() = default;
  PairProfileSet(int num_users, std::vector<PairProfile> pairs);

  int num_users() const { return num_users_; }
  int num_pairs() const { return static_cast<int>(pairs_.size()); }

  const PairProfile& at(int i, int j) const;
  const std::vector<PairProfile>& all() const { return pairs_; }

  // Envelope of user u under pair (i, j); u must be i or j.
  const DistortionEnvelope& envelope_of(int u, int i, int j) const;

  static int pair_index(int i, int j, int num_users);

  void save(std::ostream& os) const;
  void save_file(const std::string& path) const;
  static PairProfileSet load(std::istream& is);
  static PairProfileSet load_file(const std::string& path);

 private:
  int num_users_ = 0;
  std::vector<PairProfile> pairs_;
};

// Distortion-feasible lower bound for one pair:
// max(delta_min, delta_i^D, delta_j^D); nullopt when either user cannot meet
// its distortion budget even at delta = 1.
std::optional<double> pair_delta_lower_bound(const PairProfile& profile,
                                             double d_max_i, double d_max_j,
                                             double delta_min);

// Synthetic stand-in for the offline profiling step: draws similarities,
// maps them to interference surfaces and distortion envelopes.
PairProfileSet synth_profiles(const Scenario& scenario,
                              const ProfileGenParams& params,
                              std::uint64_t seed);

// Samples a surface on the default profiling grid (8 log-spaced powers in
// [P_max/(5K), P_max] x the delta grid); used by the profile CLI and the
// fit round-trip path.
RhoSampleGrid sample_rho_grid(const RhoSurface& surface, double p_max_watts,
                              int num_groups, const std::vector<double>& deltas);

}  // namespace sfma
