#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rcor/combined.hpp"
#include "rcor/permutation.hpp"
#include "rcor/ranks.hpp"

namespace rcor {

// Binary-expansion merge of a d-vector into one scalar. The digit string is
//   1, sign bits c_1..c_d (1 for x_i >= 0), interleaved integer bits
//   (integer_bits per coordinate, most significant first), then interleaved
//   fractional bits (fractional_bits per coordinate),
// read as a base-2 number with the point after the integer block. Negative
// coordinates contribute complemented magnitude digits, so the code is
// injective on the truncation grid and strictly increasing in each
// coordinate over the whole real line.
struct BorelConfig {
  int integer_bits = 16;
  int fractional_bits = 32;
};

// Exact digit string, packed most-significant-bit first. Comparisons are
// numeric comparisons of the encoded value; only codes from the same
// configuration (same length) are ordered against each other.
class BorelCode {
 public:
  BorelCode(std::vector<std::uint64_t> words, std::int64_t bits)
      : words_(std::move(words)), bits_(bits) {}

  std::int64_t bits() const noexcept { return bits_; }
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend std::strong_ordering operator<=>(const BorelCode& a, const BorelCode& b);
  friend bool operator==(const BorelCode& a, const BorelCode& b);

 private:
  std::vector<std::uint64_t> words_;
  std::int64_t bits_ = 0;
};

BorelCode borel_digits(std::span<const double> row, const BorelConfig& config = {});

// The digit string read back as a double. Lossy once the string exceeds 53
// significant bits; ordering work should use borel_digits instead.
double borel_merge(std::span<const double> row, const BorelConfig& config = {});

// One code per matrix row.
std::vector<BorelCode> borel_code_rows(const Matrix& m, const BorelConfig& config = {});

// Ranks of codes, 1-based, ties broken uniformly at random from tie_seed.
std::vector<std::int64_t> rank_codes(const std::vector<BorelCode>& codes,
                                     std::uint64_t tie_seed = 0);

// Kendall-style statistic on componentwise-dominance counts:
//   [n(n-1) Rxy - Rx Ry] / sqrt(Rx Ry (n(n-1) - Rx) (n(n-1) - Ry)).
// Vanishing denominator factors raise degenerate_error.
double grothe_tau(const MultiRankProfile& profile);
double grothe_tau(const MultiSample& sample, bool self_inclusion = false);

// Spearman-style statistic on dominance counts: Sxy / sqrt(Sx Sy) with
//   Sxy = c1 sum_i rx_i ry_i - c2 Rx Ry - c1 Rxy,
//   Sx  = c1 sum_i rx_i (rx_i - 1) - c2 Rx^2   (Sy alike),
//   c1 = 1/(n(n-1)(n-2)), c2 = 1/(n^2 (n-1)^2).
// Nonpositive variance terms raise degenerate_error. Needs n >= 3.
double grothe_spearman(const MultiRankProfile& profile);
double grothe_spearman(const MultiSample& sample, bool self_inclusion = false);

// Univariate statistic applied to the merged scalars eta(X_i), eta(Y_i).
enum class MergedStat { xi, spearman, kendall };
double borel_stat(const MultiSample& sample, MergedStat which,
                  const BorelConfig& config = {}, std::uint64_t tie_seed = 0);

// Multivariate tests. spearman / kendall are single-statistic two-sided
// tests; cs / ck add the two directed xi statistics under a max; xisym is
// the xi pair alone (identical under both permutation modes).
enum class MvMethod { xisym, spearman, kendall, cs, ck };
std::optional<MvMethod> parse_mv_method(std::string_view name);
const char* to_string(MvMethod method);

// grothe_permutation: monotone part from dominance counts, xi parts from
//   merged scalars, permutation inference with the monotone sd estimated
//   from the permutation replicates.
// borel_analytic: every statistic on merged scalars, normal-limit p-values.
// borel_permutation: statistics on merged scalars, permutation inference.
enum class MvMode { grothe_permutation, borel_analytic, borel_permutation };
std::optional<MvMode> parse_mv_mode(std::string_view name);
const char* to_string(MvMode mode);

struct MvOptions {
  MvMode mode = MvMode::grothe_permutation;
  BorelConfig borel;
  bool self_inclusion = false;
  std::uint64_t tie_seed = 0;
  ComponentScaling scaling = ComponentScaling::standardized;
};

// `plan` is ignored in borel_analytic mode.
TestOutcome mv_test(const MultiSample& sample, MvMethod method,
                    const MvOptions& options = {}, const PermutationPlan& plan = {});

}  // namespace rcor
