// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace sfma {

// Monotone nonincreasing piecewise-linear upper envelope of empirical
// distortion samples over the compression-ratio grid. Evaluation extends
// flat on both sides of the breakpoint range so the envelope is defined on
// all of [delta_min, 1].
class DistortionEnvelope {
 public:
  DistortionEnvelope() = default;

  // Breakpoints must be ascending in delta with nonincreasing values; the
  // factory below is the usual way to obtain one.
  explicit DistortionEnvelope(std::vector<std::pair<double, double>> breakpoints);

  // Suffix-maximum transform of the samples followed by linear
  // interpolation. Samples need not be sorted; ties at equal delta keep the
  // largest distortion. Requires at least two distinct delta values.
  static DistortionEnvelope build(std::vector<std::pair<double, double>> samples);

  double value(double delta) const;

  // Smallest delta in [delta_min, 1] with value(delta) <= d_max, by linear
  // segment inversion. nullopt when even value at the right end exceeds d_max.
  std::optional<double> min_delta_for_distortion(double d_max,
                                                 double delta_min) const;

  const std::vector<std::pair<double, double>>& breakpoints() const {
    return points_;
  }

  bool empty() const { return points_.empty(); }

 private:
  std::vector<std::pair<double, double>> points_;  // (delta, value) ascending
};

}  // namespace sfma
