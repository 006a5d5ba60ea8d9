// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cmath>

namespace sfma {

// Pair-dependent semantic interference factor
//
//   rho(p, delta) = rho_min + (rho_max - rho_min) / (1 + exp(a*p + b*delta + d))
//
// with a, b > 0, so the surface is nonincreasing in both arguments and
// saturates at rho_max (resource-starved) and rho_min (resource-rich).
struct RhoSurface {
  double a = 1.0;        // per-watt sensitivity
  double b = 1.0;        // per-unit-delta sensitivity
  double d = 0.0;        // offset; sigmoid midpoint at a*p + b*delta + d = 0
  double rho_min = 0.0;
  double rho_max = 1.0;
  bool degenerate = false;  // set by the fitter on zero-variance data

  bool valid() const {
    return a > 0.0 && b > 0.0 && rho_min >= 0.0 && rho_max <= 1.0 &&
           rho_min <= rho_max;
  }
};

namespace detail {
// 1/(1 + exp(e)) without overflow for |e| large.
inline double inv_one_plus_exp(double e) {
  if (e >= 0.0) {
    const double z = std::exp(-e);
    return z / (1.0 + z);
  }
  return 1.0 / (1.0 + std::exp(e));
}

// exp(e)/(1+exp(e))^2 = sigma(e) * sigma(-e), peaks at 1/4.
inline double logistic_bump(double e) {
  const double s = inv_one_plus_exp(e);
  return s * (1.0 - s);
}
}  // namespace detail

inline double eval_rho(const RhoSurface& s, double p, double delta) {
  const double e = s.a * p + s.b * delta + s.d;
  return s.rho_min + (s.rho_max - s.rho_min) * detail::inv_one_plus_exp(e);
}

// d rho / d p = -a * (rho_max - rho_min) * phi / (1 + phi)^2 <= 0.
inline double drho_dp(const RhoSurface& s, double p, double delta) {
  const double e = s.a * p + s.b * delta + s.d;
  return -s.a * (s.rho_max - s.rho_min) * detail::logistic_bump(e);
}

inline double drho_ddelta(const RhoSurface& s, double p, double delta) {
  const double e = s.a * p + s.b * delta + s.d;
  return -s.b * (s.rho_max - s.rho_min) * detail::logistic_bump(e);
}

// Offline profiling grid with interference samples rho_hat(p_n, delta_l).
struct RhoSampleGrid {
  Eigen::VectorXd powers_w;   // strictly ascending
  Eigen::VectorXd deltas;     // strictly ascending, within [delta_min, 1]
  Eigen::MatrixXd samples;    // powers.size() x deltas.size(), values in [0,1]

  bool shape_ok() const {
    return samples.rows() == powers_w.size() && samples.cols() == deltas.size();
  }
};

// Nonlinear least squares over (a, b, d, rho_min, rho_max) with bounds
// 0 <= rho_min <= rho_max <= 1 and a, b > 0. Damped Gauss-Newton with a
// fixed multi-start schedule; deterministic for a given grid.
RhoSurface fit_rho(const RhoSampleGrid& grid);

}  // namespace sfma
