// SPDX-License-Identifier: Apache-2.0

#include "sfma/envelope.hpp"

#include <algorithm>
#include <stdexcept>

namespace sfma {

DistortionEnvelope::DistortionEnvelope(
    std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
  for (size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].first <= points_[i - 1].first) {
      throw std::invalid_argument("envelope breakpoints must ascend in delta");
    }
    if (points_[i].second > points_[i - 1].second) {
      throw std::invalid_argument("envelope values must be nonincreasing");
    }
  }
}

DistortionEnvelope DistortionEnvelope::build(
    std::vector<std::pair<double, double>> samples) {
  std::sort(samples.begin(), samples.end());
  // Collapse duplicate deltas, keeping the max distortion so the result
  // still dominates every sample.
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : samples) {
    if (!pts.empty() && s.first == pts.back().first) {
      pts.back().second = std::max(pts.back().second, s.second);
    } else {
      pts.push_back(s);
    }
  }
  if (pts.size() < 2) {
    throw std::invalid_argument(
        "envelope needs at least two samples with distinct delta");
  }
  // Suffix maximum: D_hat(l) = max_{m >= l} D(m).
  for (size_t i = pts.size() - 1; i-- > 0;) {
    pts[i].second = std::max(pts[i].second, pts[i + 1].second);
  }
  return DistortionEnvelope(std::move(pts));
}

double DistortionEnvelope::value(double delta) const {
  if (points_.empty()) {
    throw std::logic_error("empty envelope");
  }
  if (delta <= points_.front().first) return points_.front().second;
  if (delta >= points_.back().first) return points_.back().second;
  auto it = std::upper_bound(
      points_.begin(), points_.end(), delta,
      [](double v, const std::pair<double, double>& p) { return v < p.first; });
  const auto& [x1, y1] = *(it - 1);
  const auto& [x2, y2] = *it;
  const double t = (delta - x1) / (x2 - x1);
  return y1 + t * (y2 - y1);
}

std::optional<double> DistortionEnvelope::min_delta_for_distortion(
    double d_max, double delta_min) const {
  if (points_.empty()) {
    throw std::logic_error("empty envelope");
  }
  if (value(1.0) > d_max) return std::nullopt;
  if (value(delta_min) <= d_max) return delta_min;
  // Walk segments left to right; the envelope is nonincreasing, so the first
  // crossing is the infimum.
  for (size_t i = 1; i < points_.size(); ++i) {
    const auto& [x1, y1] = points_[i - 1];
    const auto& [x2, y2] = points_[i];
    if (y2 <= d_max) {
      if (y1 == y2) return std::max(delta_min, x1);
      const double x = x1 + (x2 - x1) * (y1 - d_max) / (y1 - y2);
      return std::clamp(std::max(x, delta_min), delta_min, 1.0);
    }
  }
  // value(1.0) <= d_max but no interior segment crossed: the last breakpoint
  // sits below 1 and the flat extension qualifies.
  return std::max(delta_min, points_.back().first);
}

}  // namespace sfma
