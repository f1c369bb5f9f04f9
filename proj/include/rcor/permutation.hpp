#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rcor/error.hpp"
#include "rcor/rng.hpp"

namespace rcor {

// Chunked parallel map over [0, count). Each index writes only its own
// output slot, so results never depend on the worker count; workers <= 1
// runs inline.
inline void parallel_for(std::int64_t count, int workers,
                         const std::function<void(std::int64_t)>& body) {
  if (count <= 0) return;
  if (workers <= 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  const int lanes = static_cast<int>(
      std::min<std::int64_t>(count, static_cast<std::int64_t>(workers)));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(lanes));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < lanes; ++w) {
    pool.emplace_back([&, w]() {
      const std::int64_t lo = count * w / lanes;
      const std::int64_t hi = count * (w + 1) / lanes;
      try {
        for (std::int64_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct PermutationPlan {
  std::int64_t permutations = 1000;  // >= 100
  std::uint64_t master_seed = 0;
  int workers = 1;
};

inline void validate(const PermutationPlan& plan) {
  if (plan.permutations < 100) {
    throw std::invalid_argument(
        "PermutationPlan: fewer than 100 permutations is underpowered");
  }
}

// A statistic evaluated over random relabelings of the y-side. perm[i] is the
// y-row matched with x-row i; evaluation returns nullopt when the statistic
// is undefined on that relabeling.
using PermStatistic =
    std::function<std::optional<double>(std::span<const std::size_t>)>;

struct PermutationDraws {
  double observed = 0.0;
  // values[b] is the statistic on permutation b, or nullopt where degenerate.
  // Permutation b depends only on (master_seed, b), so two draws with the same
  // plan see the same relabelings slot for slot.
  std::vector<std::optional<double>> values;
  std::int64_t degenerate = 0;
};

// Draw plan.permutations relabelings; permutation b uses the stream
// derive_seed(master_seed, b), so scheduling and worker count cannot change
// the draws. Runs abort once 10% or more of the replicates are degenerate.
inline PermutationDraws permutation_draws(std::size_t n, const PermStatistic& stat,
                                          const PermutationPlan& plan) {
  validate(plan);
  if (n < 2) throw std::invalid_argument("permutation_draws: need n >= 2");

  PermutationDraws draws;

  const auto identity = identity_permutation(n);
  const auto observed = stat(identity);
  if (!observed.has_value()) {
    throw degenerate_error("statistic undefined on the observed data");
  }
  draws.observed = *observed;

  draws.values.assign(static_cast<std::size_t>(plan.permutations), std::nullopt);
  parallel_for(plan.permutations, plan.workers, [&](std::int64_t b) {
    Rng rng(derive_seed(plan.master_seed, static_cast<std::uint64_t>(b)));
    std::vector<std::size_t> perm = identity_permutation(n);
    rng.shuffle(std::span<std::size_t>(perm));
    draws.values[static_cast<std::size_t>(b)] = stat(perm);
  });

  for (const auto& s : draws.values) {
    if (!s.has_value()) ++draws.degenerate;
  }
  if (10 * draws.degenerate >= plan.permutations) {
    throw degenerate_error(
        "statistic degenerate on " + std::to_string(draws.degenerate) + " of " +
        std::to_string(plan.permutations) + " permutation replicates");
  }
  return draws;
}

struct PermutationPValue {
  double p_value = 1.0;
  double null_sd = 0.0;  // sd of the replicate statistics
  std::int64_t used = 0;
  std::int64_t degenerate = 0;
};

inline double sample_sd(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (static_cast<double>(m) - 1.0));
}

// One-sided upper Monte-Carlo p-value with the add-one rule:
// p = (1 + #{replicate >= observed}) / (#defined replicates + 1).
inline PermutationPValue permutation_pvalue(std::size_t n, const PermStatistic& stat,
                                            const PermutationPlan& plan) {
  const PermutationDraws draws = permutation_draws(n, stat, plan);
  PermutationPValue out;
  out.degenerate = draws.degenerate;
  std::int64_t at_least = 0;
  std::vector<double> defined;
  defined.reserve(draws.values.size());
  for (const auto& t : draws.values) {
    if (!t.has_value()) continue;
    defined.push_back(*t);
    if (*t >= draws.observed) ++at_least;
  }
  out.used = static_cast<std::int64_t>(defined.size());
  out.p_value = static_cast<double>(1 + at_least) /
                static_cast<double>(out.used + 1);
  out.null_sd = sample_sd(defined);
  return out;
}

}  // namespace rcor
