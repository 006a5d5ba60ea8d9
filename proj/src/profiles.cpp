// SPDX-License-Identifier: Apache-2.0

#include "sfma/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sfma/rng.hpp"

namespace sfma {

void ProfileGenParams::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (cluster_mode && num_clusters < 1) {
    throw std::invalid_argument("num_clusters must be >= 1");
  }
  if (!(intra_s_lo <= intra_s_hi && in01(intra_s_lo) && in01(intra_s_hi)) ||
      !(inter_s_lo <= inter_s_hi && in01(inter_s_lo) && in01(inter_s_hi))) {
    throw std::invalid_argument("similarity ranges must be ordered within [0,1]");
  }
  if (!(rho_lo >= 0.0 && rho_lo_spread >= 0.0 && rho_hi_base >= 0.0 &&
        rho_hi_spread >= 0.0)) {
    throw std::invalid_argument("rho mapping coefficients must be nonnegative");
  }
  if (!(family_multiplier > 0.0)) {
    throw std::invalid_argument("family_multiplier must be positive");
  }
  if (!(a_lo > 0.0 && a_lo <= a_hi && b_lo > 0.0 && b_lo <= b_hi)) {
    throw std::invalid_argument("slope ranges must be positive and ordered");
  }
  if (!(delta_mid > 0.0 && delta_mid <= 1.0)) {
    throw std::invalid_argument("delta_mid must lie in (0,1]");
  }
  if (!(dist_end > 0.0 && dist_start >= dist_end && dist_gamma > 0.0 &&
        dist_mismatch >= 0.0 && dist_floor_mismatch >= 0.0 &&
        dist_noise >= 0.0)) {
    throw std::invalid_argument("distortion template parameters invalid");
  }
  if (delta_grid.size() < 2) {
    throw std::invalid_argument("delta_grid needs at least two points");
  }
  for (size_t l = 1; l < delta_grid.size(); ++l) {
    if (delta_grid[l] <= delta_grid[l - 1]) {
      throw std::invalid_argument("delta_grid must be strictly ascending");
    }
  }
}

PairProfileSet::PairProfileSet(int num_users, std::vector<PairProfile> pairs)
    : num_users_(num_users), pairs_(std::move(pairs)) {
  const int expected = num_users * (num_users - 1) / 2;
  if (static_cast<int>(pairs_.size()) != expected) {
    throw std::invalid_argument("profile set must cover every candidate pair");
  }
  for (int i = 0; i < num_users_; ++i) {
    for (int j = i + 1; j < num_users_; ++j) {
      const auto& p = pairs_[static_cast<size_t>(pair_index(i, j, num_users_))];
      if (p.i != i || p.j != j) {
        throw std::invalid_argument("profile set pair order mismatch");
      }
    }
  }
}

int PairProfileSet::pair_index(int i, int j, int num_users) {
  if (i >= j || i < 0 || j >= num_users) {
    throw std::out_of_range("pair index requires 0 <= i < j < N");
  }
  return i * num_users - i * (i + 1) / 2 + (j - i - 1);
}

const PairProfile& PairProfileSet::at(int i, int j) const {
  return pairs_[static_cast<size_t>(pair_index(i, j, num_users_))];
}

const DistortionEnvelope& PairProfileSet::envelope_of(int u, int i, int j) const {
  const auto& p = at(i, j);
  if (u == i) return p.env_i;
  if (u == j) return p.env_j;
  throw std::out_of_range("user is not a member of the pair");
}

std::optional<double> pair_delta_lower_bound(const PairProfile& profile,
                                             double d_max_i, double d_max_j,
                                             double delta_min) {
  const auto di = profile.env_i.min_delta_for_distortion(d_max_i, delta_min);
  const auto dj = profile.env_j.min_delta_for_distortion(d_max_j, delta_min);
  if (!di || !dj) return std::nullopt;
  const double lb = std::max({delta_min, *di, *dj});
  if (lb > 1.0) return std::nullopt;
  return lb;
}

namespace {

double similarity_draw(const ProfileGenParams& gp, bool same_cluster, Rng& rng) {
  if (!gp.cluster_mode) return rng.uniform();
  return same_cluster ? rng.uniform(gp.intra_s_lo, gp.intra_s_hi)
                      : rng.uniform(gp.inter_s_lo, gp.inter_s_hi);
}

}  // namespace

PairProfileSet synth_profiles(const Scenario& scenario,
                              const ProfileGenParams& params,
                              std::uint64_t seed) {
  params.validate();
  const int n = scenario.num_users;
  const int k = scenario.num_groups();
  const double p_mid = params.p_mid_watts > 0.0
                           ? params.p_mid_watts
                           : scenario.budgets.total_power_watts / (2.0 * k);

  Rng rng(derive_seed(seed, /*tag=*/0x70726f66));  // "prof"

  std::vector<int> cluster(n, 0);
  if (params.cluster_mode) {
    for (int u = 0; u < n; ++u) {
      cluster[u] = static_cast<int>(rng.below(params.num_clusters));
    }
  }

  const double grid_span = 1.0 - params.delta_grid.front();
  std::vector<PairProfile> pairs;
  pairs.reserve(static_cast<size_t>(n * (n - 1) / 2));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairProfile pp;
      pp.i = i;
      pp.j = j;
      pp.similarity =
          similarity_draw(params, cluster[i] == cluster[j], rng);
      const double dis = 1.0 - pp.similarity;

      RhoSurface s;
      s.rho_min = params.rho_lo + dis * params.rho_lo_spread;
      s.rho_max = params.rho_hi_base + dis * params.rho_hi_spread;
      s.rho_min = std::clamp(s.rho_min * params.family_multiplier, 0.0, 1.0);
      s.rho_max = std::clamp(s.rho_max * params.family_multiplier, 0.0, 1.0);
      if (s.rho_min > s.rho_max) s.rho_min = s.rho_max;
      s.a = rng.log_uniform(params.a_lo, params.a_hi);
      s.b = rng.log_uniform(params.b_lo, params.b_hi);
      s.d = -(s.a * p_mid + s.b * params.delta_mid);
      pp.rho = s;

      // Distortion samples per user, then the conservative envelope. The
      // slope inflates with dissimilarity more than the floor does, so
      // dissimilar pairs need larger delta to hit the same quality.
      for (int which = 0; which < 2; ++which) {
        const double w_u = rng.uniform(0.5, 1.0);
        const double floor_mult = 1.0 + dis * params.dist_floor_mismatch * w_u;
        const double slope_mult = 1.0 + dis * params.dist_mismatch * w_u;
        std::vector<std::pair<double, double>> samples;
        samples.reserve(params.delta_grid.size());
        for (double dv : params.delta_grid) {
          const double ratio = std::max(0.0, (1.0 - dv) / grid_span);
          double val = params.dist_end * floor_mult +
                       (params.dist_start - params.dist_end) * slope_mult *
                           std::pow(ratio, params.dist_gamma);
          val *= 1.0 + params.dist_noise * (2.0 * rng.uniform() - 1.0);
          samples.emplace_back(dv, std::max(val, 1e-9));
        }
        auto env = DistortionEnvelope::build(std::move(samples));
        if (which == 0) {
          pp.env_i = std::move(env);
        } else {
          pp.env_j = std::move(env);
        }
      }
      pairs.push_back(std::move(pp));
    }
  }
  return PairProfileSet(n, std::move(pairs));
}

RhoSampleGrid sample_rho_grid(const RhoSurface& surface, double p_max_watts,
                              int num_groups,
                              const std::vector<double>& deltas) {
  RhoSampleGrid grid;
  const int np = 8;
  const double p_lo = p_max_watts / (5.0 * num_groups);
  grid.powers_w.resize(np);
  for (int i = 0; i < np; ++i) {
    grid.powers_w(i) =
        p_lo * std::pow(p_max_watts / p_lo, i / static_cast<double>(np - 1));
  }
  grid.deltas.resize(static_cast<Eigen::Index>(deltas.size()));
  for (size_t l = 0; l < deltas.size(); ++l) {
    grid.deltas(static_cast<Eigen::Index>(l)) = deltas[l];
  }
  grid.samples.resize(grid.powers_w.size(), grid.deltas.size());
  for (int i = 0; i < grid.powers_w.size(); ++i) {
    for (int j = 0; j < grid.deltas.size(); ++j) {
      grid.samples(i, j) = eval_rho(surface, grid.powers_w(i), grid.deltas(j));
    }
  }
  return grid;
}

namespace {

void write_envelope(std::ostream& os, const char* tag,
                    const DistortionEnvelope& env) {
  os << "env " << tag << ' ' << env.breakpoints().size();
  for (const auto& [x, y] : env.breakpoints()) {
    os << ' ' << x << ' ' << y;
  }
  os << '\n';
}

DistortionEnvelope read_envelope(std::istream& is, const std::string& expect_tag) {
  std::string kw, tag;
  size_t count = 0;
  if (!(is >> kw >> tag >> count) || kw != "env" || tag != expect_tag) {
    throw std::runtime_error("profile file: malformed envelope record");
  }
  std::vector<std::pair<double, double>> pts(count);
  for (auto& [x, y] : pts) {
    if (!(is >> x >> y)) {
      throw std::runtime_error("profile file: truncated envelope");
    }
  }
  return DistortionEnvelope(std::move(pts));
}

}  // namespace

void PairProfileSet::save(std::ostream& os) const {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "sfma-profiles v1\n";
  os << "users " << num_users_ << '\n';
  os << "pairs " << pairs_.size() << '\n';
  for (const auto& p : pairs_) {
    os << "pair " << p.i << ' ' << p.j << ' ' << p.similarity << '\n';
    os << "rho " << p.rho.a << ' ' << p.rho.b << ' ' << p.rho.d << ' '
       << p.rho.rho_min << ' ' << p.rho.rho_max << ' '
       << (p.rho.degenerate ? 1 : 0) << '\n';
    write_envelope(os, "i", p.env_i);
    write_envelope(os, "j", p.env_j);
  }
}

void PairProfileSet::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open profile file for write: " + path);
  save(os);
  if (!os) throw std::runtime_error("profile file write failed: " + path);
}

PairProfileSet PairProfileSet::load(std::istream& is) {
  std::string magic, version;
  if (!(is >> magic >> version) || magic != "sfma-profiles" || version != "v1") {
    throw std::runtime_error("profile file: bad header");
  }
  std::string kw;
  int users = 0;
  size_t count = 0;
  if (!(is >> kw >> users) || kw != "users" || users < 2) {
    throw std::runtime_error("profile file: bad users record");
  }
  if (!(is >> kw >> count) || kw != "pairs") {
    throw std::runtime_error("profile file: bad pairs record");
  }
  std::vector<PairProfile> pairs;
  pairs.reserve(count);
  for (size_t r = 0; r < count; ++r) {
    PairProfile p;
    if (!(is >> kw >> p.i >> p.j >> p.similarity) || kw != "pair") {
      throw std::runtime_error("profile file: malformed pair record");
    }
    int degenerate = 0;
    if (!(is >> kw >> p.rho.a >> p.rho.b >> p.rho.d >> p.rho.rho_min >>
          p.rho.rho_max >> degenerate) ||
        kw != "rho") {
      throw std::runtime_error("profile file: malformed rho record");
    }
    p.rho.degenerate = degenerate != 0;
    p.env_i = read_envelope(is, "i");
    p.env_j = read_envelope(is, "j");
    pairs.push_back(std::move(p));
  }
  return PairProfileSet(users, std::move(pairs));
}

PairProfileSet PairProfileSet::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open profile file: " + path);
  return load(is);
}

}  // namespace sfma
