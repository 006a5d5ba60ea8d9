// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sfma/rho.hpp"

namespace sfma {
namespace {

struct FitPoint {
  double p, delta, y;
};

// External parameters theta = (a, b, d, rho_min, rho_max).
using Theta = Eigen::Matrix<double, 5, 1>;

// The solver iterates on unconstrained variables z = (alpha, beta, d, u, v):
//   a = exp(alpha), b = exp(beta),
//   rho_max = sigma(v), rho_min = rho_max * sigma(u),
// which keeps every bound satisfied without projection, so damped steps
// cannot stall on an active constraint.
using Z = Eigen::Matrix<double, 5, 1>;

double sigma(double x) { return detail::inv_one_plus_exp(-x); }

double clamped_logit(double y) {
  const double c = std::clamp(y, 1e-9, 1.0 - 1e-9);
  return std::clamp(std::log(c / (1.0 - c)), -16.0, 16.0);
}

Theta to_theta(const Z& z) {
  Theta t;
  t(0) = std::exp(z(0));
  t(1) = std::exp(z(1));
  t(2) = z(2);
  t(4) = sigma(z(4));
  t(3) = t(4) * sigma(z(3));
  return t;
}

Z to_z(const Theta& t) {
  Z z;
  z(0) = std::log(std::max(t(0), 1e-8));
  z(1) = std::log(std::max(t(1), 1e-8));
  z(2) = t(2);
  z(4) = clamped_logit(t(4));
  z(3) = clamped_logit(t(4) > 1e-12 ? t(3) / t(4) : 0.5);
  return z;
}

double model(const Theta& t, double p, double delta) {
  const double e = t(0) * p + t(1) * delta + t(2);
  return t(3) + (t(4) - t(3)) * detail::inv_one_plus_exp(e);
}

double rss(const Theta& t, const std::vector<FitPoint>& pts) {
  double s = 0.0;
  for (const auto& q : pts) {
    const double r = model(t, q.p, q.delta) - q.y;
    s += r * r;
  }
  return s;
}

// Levenberg-damped Gauss-Newton from one start; returns the refined theta.
Theta refine(const Theta& t_init, const std::vector<FitPoint>& pts) {
  Z z = to_z(t_init);
  double mu = 1e-3;
  double best = rss(to_theta(z), pts);
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd J(n, 5);
  Eigen::VectorXd r(n);
  for (int iter = 0; iter < 400; ++iter) {
    const Theta t = to_theta(z);
    const double su = sigma(z(3));
    const double sv = sigma(z(4));
    for (int i = 0; i < n; ++i) {
      const auto& q = pts[i];
      const double e = t(0) * q.p + t(1) * q.delta + t(2);
      const double s = detail::inv_one_plus_exp(e);  // weight on rho span
      const double bump = detail::logistic_bump(e);
      const double span = t(4) - t(3);
      // d model / d theta, then chain rule into z.
      const double dm_da = -span * bump * q.p;
      const double dm_db = -span * bump * q.delta;
      const double dm_dd = -span * bump;
      const double dm_dmin = 1.0 - s;
      const double dm_dmax = s;
      J(i, 0) = dm_da * t(0);
      J(i, 1) = dm_db * t(1);
      J(i, 2) = dm_dd;
      J(i, 3) = dm_dmin * t(4) * su * (1.0 - su);
      J(i, 4) = (dm_dmax + dm_dmin * su) * sv * (1.0 - sv);
      r(i) = model(t, q.p, q.delta) - q.y;
    }
    const Eigen::Matrix<double, 5, 5> jtj = J.transpose() * J;
    const Eigen::Matrix<double, 5, 1> jtr = J.transpose() * r;
    bool stepped = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix<double, 5, 5> h = jtj;
      h.diagonal().array() += mu;
      const Z step = h.ldlt().solve(-jtr);
      const Z cand = z + step;
      const double cand_rss = rss(to_theta(cand), pts);
      if (cand_rss < best) {
        z = cand;
        best = cand_rss;
        mu = std::max(mu * 0.4, 1e-12);
        stepped = true;
        if (step.norm() < 1e-13 * (1.0 + z.norm())) return to_theta(z);
        break;
      }
      mu *= 4.0;
    }
    if (!stepped) break;
    if (best < 1e-26) break;
  }
  return to_theta(z);
}

}  // namespace

RhoSurface fit_rho(const RhoSampleGrid& grid) {
  if (!grid.shape_ok()) {
    throw std::invalid_argument("rho sample grid shape mismatch");
  }
  std::vector<FitPoint> pts;
  pts.reserve(static_cast<size_t>(grid.samples.size()));
  for (int i = 0; i < grid.powers_w.size(); ++i) {
    for (int j = 0; j < grid.deltas.size(); ++j) {
      pts.push_back({grid.powers_w(i), grid.deltas(j), grid.samples(i, j)});
    }
  }
  if (pts.size() < 5) {
    throw std::invalid_argument("rho fit needs at least 5 samples");
  }

  double y_lo = pts.front().y, y_hi = pts.front().y;
  for (const auto& q : pts) {
    y_lo = std::min(y_lo, q.y);
    y_hi = std::max(y_hi, q.y);
  }
  if (y_hi - y_lo < 1e-12) {
    RhoSurface flat;
    flat.a = 1.0;
    flat.b = 1.0;
    flat.d = 0.0;
    flat.rho_min = std::clamp(y_lo, 0.0, 1.0);
    flat.rho_max = flat.rho_min;
    flat.degenerate = true;
    return flat;
  }

  const double p_lo = grid.powers_w(0);
  const double p_hi = grid.powers_w(grid.powers_w.size() - 1);
  const double d_lo = grid.deltas(0);
  const double d_hi = grid.deltas(grid.deltas.size() - 1);
  const double p_span = std::max(p_hi - p_lo, 1e-9);
  const double d_span = std::max(d_hi - d_lo, 1e-9);
  const double p_mid = 0.5 * (p_lo + p_hi);
  const double d_mid = 0.5 * (d_lo + d_hi);
  const double y_span = y_hi - y_lo;

  // Fixed 8-start schedule. Four starts invert the sigmoid: assume
  // saturation levels slightly outside the sample range, map each sample to
  // its logit, and linear-solve for (a, b, d). Four more place a generic
  // transition at two slope scales and two centres.
  std::vector<Theta> starts;
  for (double margin : {1e-3, 0.02, 0.08, 0.2}) {
    const double lo = std::max(0.0, y_lo - margin * y_span);
    const double hi = std::min(1.0, y_hi + margin * y_span);
    Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), 3);
    Eigen::VectorXd e(static_cast<Eigen::Index>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) {
      const double span = std::max(hi - lo, 1e-9);
      const double sig =
          std::clamp((pts[i].y - lo) / span, 1e-4, 1.0 - 1e-4);
      e(static_cast<Eigen::Index>(i)) = std::log((1.0 - sig) / sig);
      A(static_cast<Eigen::Index>(i), 0) = pts[i].p;
      A(static_cast<Eigen::Index>(i), 1) = pts[i].delta;
      A(static_cast<Eigen::Index>(i), 2) = 1.0;
    }
    const Eigen::Vector3d abd =
        A.colPivHouseholderQr().solve(e);
    Theta t0;
    t0(0) = abd(0) > 1e-6 ? abd(0) : 2.0 / p_span;
    t0(1) = abd(1) > 1e-6 ? abd(1) : 2.0 / d_span;
    t0(2) = abd(2);
    t0(3) = lo;
    t0(4) = hi;
    starts.push_back(t0);
  }
  for (double scale : {2.0, 8.0}) {
    for (int centre = 0; centre < 2; ++centre) {
      Theta t0;
      t0(0) = scale / p_span;
      t0(1) = scale / d_span;
      const double pc = centre == 0 ? p_mid : p_lo + 0.25 * p_span;
      const double dc = centre == 0 ? d_mid : d_lo + 0.25 * d_span;
      t0(2) = -(t0(0) * pc + t0(1) * dc);
      t0(3) = std::clamp(y_lo, 0.0, 1.0);
      t0(4) = std::clamp(y_hi, 0.0, 1.0);
      starts.push_back(t0);
    }
  }

  Theta best = starts.front();
  double best_rss = std::numeric_limits<double>::infinity();
  for (const Theta& t0 : starts) {
    const Theta t = refine(t0, pts);
    const double v = rss(t, pts);
    if (v < best_rss) {
      best_rss = v;
      best = t;
    }
  }

  RhoSurface s;
  s.a = best(0);
  s.b = best(1);
  s.d = best(2);
  s.rho_min = best(3);
  s.rho_max = best(4);
  s.degenerate = false;
  return s;
}

}  // namespace sfma
