#pragma once

#include <cmath>

namespace rcor {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Standard normal CDF through erfc; absolute error ~1e-16 over the whole
// double range, including far tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

// Upper tail P(Z > z); keeps full relative precision for large z, where
// 1 - normal_cdf(z) would cancel.
inline double normal_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

inline double clamp_probability(double p) {
  if (p < 0.0) return 0.0;
  if (p > 1.0) return 1.0;
  return p;
}

}  // namespace rcor
