#include "rcor/unistat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace rcor {

std::int64_t count_inversions(std::span<const std::int64_t> sequence) {
  const std::size_t n = sequence.size();
  std::vector<std::int64_t> buf(sequence.begin(), sequence.end());
  std::vector<std::int64_t> tmp(n);
  std::int64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (buf[a] <= buf[b]) {
          tmp[out++] = buf[a++];
        } else {
          inversions += static_cast<std::int64_t>(mid - a);
          tmp[out++] = buf[b++];
        }
      }
      while (a < mid) tmp[out++] = buf[a++];
      while (b < hi) tmp[out++] = buf[b++];
      std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
                tmp.begin() + static_cast<std::ptrdiff_t>(hi),
                buf.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
  return inversions;
}

namespace {

void require_size(std::size_t n, const char* what) {
  if (n < 2) throw std::invalid_argument(std::string(what) + ": need n >= 2");
}

}  // namespace

double xi_from_concomitant(std::span<const std::int64_t> ranks) {
  const std::size_t n = ranks.size();
  require_size(n, "xi");
  std::int64_t total = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    total += std::llabs(ranks[i + 1] - ranks[i]);
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 3.0 * static_cast<double>(total) / (nn * nn - 1.0);
}

double xi(const RankProfile& profile) {
  return xi_from_concomitant(profile.concomitant_ranks);
}

double xi(const PairedSample& sample, std::uint64_t tie_seed) {
  return xi(concomitant_profile(sample, tie_seed));
}

double spearman_from_concomitant(std::span<const std::int64_t> ranks) {
  const std::size_t n = ranks.size();
  require_size(n, "spearman");
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t d = static_cast<std::int64_t>(i) + 1 - ranks[i];
    total += d * d;
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * static_cast<double>(total) / (nn * (nn * nn - 1.0));
}

double spearman(const RankProfile& profile) {
  return spearman_from_concomitant(profile.concomitant_ranks);
}

double spearman(const PairedSample& sample, std::uint64_t tie_seed) {
  return spearman(concomitant_profile(sample, tie_seed));
}

double kendall_from_concomitant(std::span<const std::int64_t> ranks) {
  const std::size_t n = ranks.size();
  require_size(n, "kendall");
  const std::int64_t inv = count_inversions(ranks);
  const double nn = static_cast<double>(n);
  return 1.0 - 4.0 * static_cast<double>(inv) / (nn * (nn - 1.0));
}

double kendall(const RankProfile& profile) {
  return kendall_from_concomitant(profile.concomitant_ranks);
}

double kendall(const PairedSample& sample, std::uint64_t tie_seed) {
  return kendall(concomitant_profile(sample, tie_seed));
}

double sample_median(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("sample_median: empty input");
  std::vector<double> work(values.begin(), values.end());
  const std::size_t mid = n / 2;
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(mid),
                   work.end());
  const double upper = work[mid];
  if (n % 2 == 1) return upper;
  const double lower =
      *std::max_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double quadrant(const PairedSample& sample) {
  const std::size_t n = sample.n();
  const double mx = sample_median(sample.x());
  const double my = sample_median(sample.y());
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (sample.x()[i] - mx) * (sample.y()[i] - my);
    if (p > 0) ++total;
    else if (p < 0) --total;
  }
  return static_cast<double>(total) / static_cast<double>(n);
}

NullMoments xi_null_moments(std::int64_t n) {
  require_size(static_cast<std::size_t>(n > 0 ? n : 0), "xi_null_moments");
  const double nn = static_cast<double>(n);
  NullMoments m;
  m.mean = 0.0;
  m.variance = (nn / (10.0 * (nn + 1.0))) * ((nn - 2.0) / (nn - 1.0)) *
               ((4.0 * nn - 7.0) / (nn - 1.0));
  m.asymptotic_variance = 0.4;
  return m;
}

NullMoments tau_null_moments(std::int64_t n) {
  require_size(static_cast<std::size_t>(n > 0 ? n : 0), "tau_null_moments");
  const double nn = static_cast<double>(n);
  NullMoments m;
  m.mean = 0.0;
  m.variance = 2.0 * (2.0 * nn + 5.0) / (9.0 * (nn - 1.0));
  m.asymptotic_variance = 4.0 / 9.0;
  return m;
}

NullMoments quadrant_null_moments(std::int64_t n) {
  require_size(static_cast<std::size_t>(n > 0 ? n : 0), "quadrant_null_moments");
  const double nn = static_cast<double>(n);
  NullMoments m;
  m.mean = 0.0;
  m.variance = (n % 2 == 1) ? (nn - 1.0) / nn : nn / (nn - 1.0);
  m.asymptotic_variance = 1.0;
  return m;
}

}  // namespace rcor
