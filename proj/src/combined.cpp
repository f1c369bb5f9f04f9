#include "rcor/combined.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rcor/normal.hpp"
#include "rcor/rng.hpp"
#include "rcor/unistat.hpp"

namespace rcor {

const char* to_string(PValueSource source) {
  return source == PValueSource::analytic ? "analytic" : "permutation";
}

namespace {

// Tail maps written in q = P(Z > z); the polynomial forms are exact
// rearrangements of the Phi expressions and do not cancel for large z.
double tail_max3(double z) {
  const double q = normal_sf(z);
  return clamp_probability(q * (4.0 + q * (2.0 * q - 5.0)));
}

double tail_max_abs_one(double z) {
  const double q = normal_sf(z);
  return clamp_probability(q * (3.0 - 2.0 * q));
}

double tail_max_pos2(double z) {
  const double q = normal_sf(z);
  return clamp_probability(q * (2.0 - q));
}

void require_nonnegative_z(double z, const char* what) {
  if (!std::isfinite(z) || z < 0.0) {
    throw std::invalid_argument(std::string(what) + ": z must be finite and >= 0");
  }
}

}  // namespace

double pvalue_max3(double z) {
  require_nonnegative_z(z, "pvalue_max3");
  return tail_max3(z);
}

double pvalue_max_abs_one(double z) {
  require_nonnegative_z(z, "pvalue_max_abs_one");
  return tail_max_abs_one(z);
}

double pvalue_max_pos2(double z) {
  require_nonnegative_z(z, "pvalue_max_pos2");
  return tail_max_pos2(z);
}

namespace {

struct RankPair {
  std::vector<std::int64_t> x_ranks;
  std::vector<std::int64_t> y_ranks;
};

RankPair make_rank_pair(const PairedSample& sample, std::uint64_t tie_seed) {
  return RankPair{rank_vector(sample.x(), derive_seed(tie_seed, 1)),
                  rank_vector(sample.y(), derive_seed(tie_seed, 2))};
}

double sqrt_n(std::size_t n) { return std::sqrt(static_cast<double>(n)); }

}  // namespace

// Multiplier applied to |monotone statistic| before it enters the max.
double monotone_component_scale(MonotoneFlavor flavor, ComponentScaling scaling,
                                std::int64_t n) {
  switch (scaling) {
    case ComponentScaling::standardized:
      switch (flavor) {
        case MonotoneFlavor::spearman: return 1.0;
        case MonotoneFlavor::kendall: return 1.5;
        case MonotoneFlavor::quadrant: return 1.0;
      }
      break;
    case ComponentScaling::finite_sample:
      switch (flavor) {
        // V[sqrt(n) S_n] = n/(n-1); the classical exact Spearman null variance.
        case MonotoneFlavor::spearman:
          return std::sqrt((static_cast<double>(n) - 1.0) / static_cast<double>(n));
        case MonotoneFlavor::kendall:
          return 1.0 / std::sqrt(tau_null_moments(n).variance);
        case MonotoneFlavor::quadrant:
          return 1.0 / std::sqrt(quadrant_null_moments(n).variance);
      }
      break;
    case ComponentScaling::printed:
      switch (flavor) {
        case MonotoneFlavor::spearman: return 1.0;
        case MonotoneFlavor::kendall: return 1.0;
        case MonotoneFlavor::quadrant: return 1.5;
      }
      break;
  }
  throw std::invalid_argument("monotone_component_scale: unknown flavor");
}

double xi_component_scale(ComponentScaling scaling, std::int64_t n) {
  if (scaling == ComponentScaling::finite_sample) {
    const double v = xi_null_moments(n).variance;
    if (v <= 0.0) {
      throw std::invalid_argument("finite-sample scaling of xi needs n >= 3");
    }
    return 1.0 / std::sqrt(v);
  }
  return std::sqrt(2.5);
}

TestOutcome combined_asymmetric(const PairedSample& sample,
                                const CombinedOptions& options) {
  const std::int64_t n = static_cast<std::int64_t>(sample.n());
  const RankPair pair = make_rank_pair(sample, options.tie_seed);
  const auto r_xy = concomitant_from_ranks(pair.x_ranks, pair.y_ranks);

  const double monotone =
      std::abs(spearman_from_concomitant(r_xy)) *
      monotone_component_scale(MonotoneFlavor::spearman, options.scaling, n);
  const double xi_part = xi_from_concomitant(r_xy) * xi_component_scale(options.scaling, n);

  TestOutcome out;
  out.method = "cs_asym";
  out.n = n;
  out.components = {{"monotone", monotone}, {"xi_xy", xi_part}};
  out.statistic = std::max(monotone, xi_part);
  out.p_value = tail_max_abs_one(sqrt_n(sample.n()) * out.statistic);
  return out;
}

TestOutcome combined_symmetric(const PairedSample& sample, MonotoneFlavor flavor,
                               const CombinedOptions& options) {
  const std::int64_t n = static_cast<std::int64_t>(sample.n());
  const RankPair pair = make_rank_pair(sample, options.tie_seed);
  const auto r_xy = concomitant_from_ranks(pair.x_ranks, pair.y_ranks);
  const auto r_yx = concomitant_from_ranks(pair.y_ranks, pair.x_ranks);

  double raw = 0.0;
  const char* method = nullptr;
  switch (flavor) {
    case MonotoneFlavor::spearman:
      raw = spearman_from_concomitant(r_xy);
      method = "cs";
      break;
    case MonotoneFlavor::kendall:
      raw = kendall_from_concomitant(r_xy);
      method = "ck";
      break;
    case MonotoneFlavor::quadrant:
      raw = quadrant(sample);
      method = "cq";
      break;
  }

  const double monotone =
      std::abs(raw) * monotone_component_scale(flavor, options.scaling, n);
  const double xs = xi_component_scale(options.scaling, n);
  const double xi_xy = xi_from_concomitant(r_xy) * xs;
  const double xi_yx = xi_from_concomitant(r_yx) * xs;

  TestOutcome out;
  out.method = method;
  out.n = n;
  out.components = {{"monotone", monotone}, {"xi_xy", xi_xy}, {"xi_yx", xi_yx}};
  out.statistic = std::max({monotone, xi_xy, xi_yx});
  out.p_value = tail_max3(sqrt_n(sample.n()) * out.statistic);
  return out;
}

TestOutcome symmetric_xi(const PairedSample& sample,
                         const CombinedOptions& options) {
  const std::int64_t n = static_cast<std::int64_t>(sample.n());
  const RankPair pair = make_rank_pair(sample, options.tie_seed);
  const auto r_xy = concomitant_from_ranks(pair.x_ranks, pair.y_ranks);
  const auto r_yx = concomitant_from_ranks(pair.y_ranks, pair.x_ranks);

  const double xs = xi_component_scale(options.scaling, n);
  const double xi_xy = xi_from_concomitant(r_xy) * xs;
  const double xi_yx = xi_from_concomitant(r_yx) * xs;

  TestOutcome out;
  out.method = "xisym";
  out.n = n;
  out.components = {{"xi_xy", xi_xy}, {"xi_yx", xi_yx}};
  out.statistic = std::max(xi_xy, xi_yx);
  // The max of two xi values can be negative; the tail form handles z < 0.
  out.p_value = tail_max_pos2(sqrt_n(sample.n()) * out.statistic);
  return out;
}

namespace {

// One-statistic tests. xi rejects for large positive values; the monotone
// statistics are two-sided.
TestOutcome single_stat_test(const PairedSample* sample, const RankPair& pair,
                             UniMethod method, const CombinedOptions& options) {
  const std::size_t n_sz = pair.x_ranks.size();
  const std::int64_t n = static_cast<std::int64_t>(n_sz);
  const bool finite = options.scaling == ComponentScaling::finite_sample;

  TestOutcome out;
  out.method = to_string(method);
  out.n = n;

  double value = 0.0;
  double sd = 1.0;
  bool one_sided = false;
  switch (method) {
    case UniMethod::xi: {
      const auto r_xy = concomitant_from_ranks(pair.x_ranks, pair.y_ranks);
      value = xi_from_concomitant(r_xy);
      sd = finite ? std::sqrt(xi_null_moments(n).variance) : std::sqrt(0.4);
      one_sided = true;
      break;
    }
    case UniMethod::spearman: {
      const auto r_xy = concomitant_from_ranks(pair.x_ranks, pair.y_ranks);
      value = spearman_from_concomitant(r_xy);
      sd = finite ? std::sqrt(static_cast<double>(n) / (static_cast<double>(n) - 1.0))
                  : 1.0;
      break;
    }
    case UniMethod::kendall: {
      const auto r_xy = concomitant_from_ranks(pair.x_ranks, pair.y_ranks);
      value = kendall_from_concomitant(r_xy);
      sd = finite ? std::sqrt(tau_null_moments(n).variance) : 2.0 / 3.0;
      break;
    }
    case UniMethod::quadrant: {
      if (sample == nullptr) {
        throw std::invalid_argument("quadrant test needs raw values, not ranks");
      }
      value = quadrant(*sample);
      sd = finite ? std::sqrt(quadrant_null_moments(n).variance) : 1.0;
      break;
    }
    default:
      throw std::invalid_argument("single_stat_test: not a single statistic");
  }

  out.statistic = value;
  const double z = sqrt_n(n_sz) * value / sd;
  out.p_value = one_sided ? clamp_probability(normal_sf(z))
                          : clamp_probability(2.0 * normal_sf(std::abs(z)));
  return out;
}

TestOutcome dispatch(const PairedSample* sample, const RankPair* pair,
                     UniMethod method, const CombinedOptions& options) {
  // Paths that need raw values.
  switch (method) {
    case UniMethod::quadrant:
    case UniMethod::cq:
      if (sample == nullptr) {
        throw std::invalid_argument(
            "quadrant-based tests need raw values, not ranks");
      }
      break;
    default:
      break;
  }

  if (sample != nullptr) {
    switch (method) {
      case UniMethod::cs:
        return combined_symmetric(*sample, MonotoneFlavor::spearman, options);
      case UniMethod::ck:
        return combined_symmetric(*sample, MonotoneFlavor::kendall, options);
      case UniMethod::cq:
        return combined_symmetric(*sample, MonotoneFlavor::quadrant, options);
      case UniMethod::xisym:
        return symmetric_xi(*sample, options);
      case UniMethod::cs_asym:
        return combined_asymmetric(*sample, options);
      default: {
        const RankPair local = make_rank_pair(*sample, options.tie_seed);
        return single_stat_test(sample, local, method, options);
      }
    }
  }

  // Rank-driven path.
  const std::int64_t n = static_cast<std::int64_t>(pair->x_ranks.size());
  const double xs = xi_component_scale(options.scaling, n);
  const auto r_xy = concomitant_from_ranks(pair->x_ranks, pair->y_ranks);

  TestOutcome out;
  out.n = n;
  switch (method) {
    case UniMethod::cs:
    case UniMethod::ck: {
      const auto r_yx = concomitant_from_ranks(pair->y_ranks, pair->x_ranks);
      const MonotoneFlavor flavor = method == UniMethod::cs
                                        ? MonotoneFlavor::spearman
                                        : MonotoneFlavor::kendall;
      const double raw = flavor == MonotoneFlavor::spearman
                             ? spearman_from_concomitant(r_xy)
                             : kendall_from_concomitant(r_xy);
      const double monotone =
          std::abs(raw) * monotone_component_scale(flavor, options.scaling, n);
      const double xi_xy = xi_from_concomitant(r_xy) * xs;
      const double xi_yx = xi_from_concomitant(r_yx) * xs;
      out.method = to_string(method);
      out.components = {{"monotone", monotone}, {"xi_xy", xi_xy}, {"xi_yx", xi_yx}};
      out.statistic = std::max({monotone, xi_xy, xi_yx});
      out.p_value = tail_max3(sqrt_n(pair->x_ranks.size()) * out.statistic);
      return out;
    }
    case UniMethod::xisym: {
      const auto r_yx = concomitant_from_ranks(pair->y_ranks, pair->x_ranks);
      const double xi_xy = xi_from_concomitant(r_xy) * xs;
      const double xi_yx = xi_from_concomitant(r_yx) * xs;
      out.method = to_string(method);
      out.components = {{"xi_xy", xi_xy}, {"xi_yx", xi_yx}};
      out.statistic = std::max(xi_xy, xi_yx);
      out.p_value = tail_max_pos2(sqrt_n(pair->x_ranks.size()) * out.statistic);
      return out;
    }
    case UniMethod::cs_asym: {
      const double monotone =
          std::abs(spearman_from_concomitant(r_xy)) *
          monotone_component_scale(MonotoneFlavor::spearman, options.scaling, n);
      const double xi_xy = xi_from_concomitant(r_xy) * xs;
      out.method = to_string(method);
      out.components = {{"monotone", monotone}, {"xi_xy", xi_xy}};
      out.statistic = std::max(monotone, xi_xy);
      out.p_value = tail_max_abs_one(sqrt_n(pair->x_ranks.size()) * out.statistic);
      return out;
    }
    default:
      return single_stat_test(nullptr, *pair, method, options);
  }
}

}  // namespace

TestOutcome univariate_test(const PairedSample& sample, UniMethod method,
                            const CombinedOptions& options) {
  return dispatch(&sample, nullptr, method, options);
}

TestOutcome univariate_test_on_ranks(std::span<const std::int64_t> x_ranks,
                                     std::span<const std::int64_t> y_ranks,
                                     UniMethod method,
                                     const CombinedOptions& options) {
  if (x_ranks.size() != y_ranks.size()) {
    throw std::invalid_argument("univariate_test_on_ranks: length mismatch");
  }
  if (x_ranks.size() < 2) {
    throw std::invalid_argument("univariate_test_on_ranks: need n >= 2");
  }
  RankPair pair;
  pair.x_ranks.assign(x_ranks.begin(), x_ranks.end());
  pair.y_ranks.assign(y_ranks.begin(), y_ranks.end());
  return dispatch(nullptr, &pair, method, options);
}

std::optional<UniMethod> parse_uni_method(std::string_view name) {
  if (name == "xi") return UniMethod::xi;
  if (name == "spearman" || name == "s") return UniMethod::spearman;
  if (name == "kendall" || name == "tau") return UniMethod::kendall;
  if (name == "quadrant" || name == "q") return UniMethod::quadrant;
  if (name == "cs") return UniMethod::cs;
  if (name == "ck") return UniMethod::ck;
  if (name == "cq") return UniMethod::cq;
  if (name == "xisym") return UniMethod::xisym;
  if (name == "cs_asym") return UniMethod::cs_asym;
  return std::nullopt;
}

const char* to_string(UniMethod method) {
  switch (method) {
    case UniMethod::xi: return "xi";
    case UniMethod::spearman: return "spearman";
    case UniMethod::kendall: return "kendall";
    case UniMethod::quadrant: return "quadrant";
    case UniMethod::cs: return "cs";
    case UniMethod::ck: return "ck";
    case UniMethod::cq: return "cq";
    case UniMethod::xisym: return "xisym";
    case UniMethod::cs_asym: return "cs_asym";
  }
  return "unknown";
}

}  // namespace rcor
