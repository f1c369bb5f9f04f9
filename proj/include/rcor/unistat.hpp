#pragma once

#include <cstdint>
#include <span>

#include "rcor/ranks.hpp"

namespace rcor {

// Number of inversions, bottom-up merge counting, O(n log n).
std::int64_t count_inversions(std::span<const std::int64_t> sequence);

// Chatterjee's rank correlation on a concomitant arrangement R:
//   xi = 1 - 3 * sum_i |R_{i+1} - R_i| / (n^2 - 1).
// Asymmetric in (x, y); equals (n-2)/(n+1) when y increases with x.
double xi_from_concomitant(std::span<const std::int64_t> concomitant_ranks);
double xi(const RankProfile& profile);
double xi(const PairedSample& sample, std::uint64_t tie_seed = 0);

// Spearman's rho: 1 - 6 * sum_k (k - R_k)^2 / (n (n^2 - 1)).
double spearman_from_concomitant(std::span<const std::int64_t> concomitant_ranks);
double spearman(const RankProfile& profile);
double spearman(const PairedSample& sample, std::uint64_t tie_seed = 0);

// Kendall's tau via inversion counting on the concomitant arrangement:
//   tau = 1 - 4 * inv(R) / (n (n - 1)).
double kendall_from_concomitant(std::span<const std::int64_t> concomitant_ranks);
double kendall(const RankProfile& profile);
double kendall(const PairedSample& sample, std::uint64_t tie_seed = 0);

// Quadrant (Blomqvist) statistic: mean of sgn[(x_i - med x)(y_i - med y)],
// with the sample median taken as the middle order statistic (odd n) or the
// average of the two central ones (even n).
double quadrant(const PairedSample& sample);

// Sample median under the convention above.
double sample_median(std::span<const double> values);

// Exact mean and variance of sqrt(n) * statistic under independence with
// continuous margins, and the n -> infinity variance.
struct NullMoments {
  double mean = 0.0;
  double variance = 0.0;
  double asymptotic_variance = 0.0;
};

// variance = n (n - 2) (4n - 7) / (10 (n + 1) (n - 1)^2), limit 2/5.
NullMoments xi_null_moments(std::int64_t n);

// variance = 2 (2n + 5) / (9 (n - 1)), limit 4/9.
NullMoments tau_null_moments(std::int64_t n);

// variance = (n - 1)/n for odd n, n/(n - 1) for even n, limit 1.
NullMoments quadrant_null_moments(std::int64_t n);

}  // namespace rcor
