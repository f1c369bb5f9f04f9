#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "rcor/ranks.hpp"

namespace rcor {

enum class PValueSource { analytic, permutation };
const char* to_string(PValueSource source);

// Result of one hypothesis test. `statistic` is the reported test statistic
// on the raw (not sqrt(n)-scaled) scale; for max-type tests it equals the
// largest entry of `components`, which are stored as they enter the max.
struct TestOutcome {
  std::string method;
  double statistic = 0.0;
  double p_value = 1.0;
  PValueSource p_source = PValueSource::analytic;
  std::int64_t n = 0;
  std::map<std::string, double> components;
  std::optional<std::string> mode;  // multivariate backend, when applicable
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> permutations;
  std::optional<std::int64_t> degenerate_replicates;
  std::optional<double> null_sd;
};

// How the monotone and xi components are put on a common scale before the
// max is taken:
//   standardized  - divide each by its asymptotic null sd ((3/2)|tau|,
//                   |S|, |Q|, sqrt(5/2) xi); the default, and the scaling
//                   that holds the alpha = 0.05 size across flavors.
//   finite_sample - divide by the exact finite-n null sd where known.
//   printed       - the raw |tau| and (3/2)|Q| conventions some references
//                   print; sizes drift at moderate alpha, kept for
//                   comparability.
enum class ComponentScaling { standardized, finite_sample, printed };

struct CombinedOptions {
  ComponentScaling scaling = ComponentScaling::standardized;
  std::uint64_t tie_seed = 0;
};

// Exceedance probabilities for maxima of independent standard normals;
// z must be finite and >= 0.
double pvalue_max3(double z);         // P(max(|Z1|, Z2, Z3) >= z) = 1 + Phi^2 - 2 Phi^3
double pvalue_max_abs_one(double z);  // P(max(|Z1|, Z2) >= z)     = 1 - (2 Phi - 1) Phi
double pvalue_max_pos2(double z);     // P(max(Z1, Z2) >= z)       = 1 - Phi^2

enum class MonotoneFlavor { spearman, kendall, quadrant };

// Multiplier a component is given before entering the max, per the scaling
// conventions above.
double monotone_component_scale(MonotoneFlavor flavor, ComponentScaling scaling,
                                std::int64_t n);
double xi_component_scale(ComponentScaling scaling, std::int64_t n);

// Asymmetric combined test: max(|S_n|, sqrt(5/2) xi(x, y)), p-value from
// the max(|Z1|, Z2) tail at z = sqrt(n) * statistic.
TestOutcome combined_asymmetric(const PairedSample& sample,
                                const CombinedOptions& options = {});

// Symmetric combined test: max(scaled |monotone|, sqrt(5/2) xi(x, y),
// sqrt(5/2) xi(y, x)), p-value from the max(|Z1|, Z2, Z3) tail. Invariant
// under swapping x and y.
TestOutcome combined_symmetric(const PairedSample& sample, MonotoneFlavor flavor,
                               const CombinedOptions& options = {});

// Symmetrized xi test: max(sqrt(5/2) xi(x, y), sqrt(5/2) xi(y, x)),
// p = 1 - Phi(z)^2.
TestOutcome symmetric_xi(const PairedSample& sample,
                         const CombinedOptions& options = {});

// CLI / simulation vocabulary. cs, ck, cq are the symmetric combined tests
// with Spearman/Kendall/quadrant monotone parts; cs_asym the asymmetric
// Spearman form; the first four are single-statistic tests.
enum class UniMethod { xi, spearman, kendall, quadrant, cs, ck, cq, xisym, cs_asym };
std::optional<UniMethod> parse_uni_method(std::string_view name);
const char* to_string(UniMethod method);

TestOutcome univariate_test(const PairedSample& sample, UniMethod method,
                            const CombinedOptions& options = {});

// Same tests driven by precomputed rank permutations (used by the
// merged-scalar multivariate path). Rank-free methods (quadrant, cq) are
// rejected here.
TestOutcome univariate_test_on_ranks(std::span<const std::int64_t> x_ranks,
                                     std::span<const std::int64_t> y_ranks,
                                     UniMethod method,
                                     const CombinedOptions& options = {});

}  // namespace rcor
