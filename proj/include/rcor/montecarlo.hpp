#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcor/combined.hpp"
#include "rcor/mvstat.hpp"
#include "rcor/permutation.hpp"
#include "rcor/ranks.hpp"

namespace rcor {

// Simulation designs. U1-U4 are univariate alternatives on X ~ Uniform[-1,1]
// with N(0,1) noise (linear, quadratic, stepwise, sinusoid); M1-M6 are the
// p = q = 3 alternatives; null_uni and null_mv are the independence designs
// used for size studies.
enum class ScenarioId {
  U1,
  U2,
  U3,
  U4,
  null_uni,
  M1,
  M2,
  M3,
  M4,
  M5,
  M6,
  null_mv,
};

std::optional<ScenarioId> parse_scenario(std::string_view name);
const char* to_string(ScenarioId id);
bool is_multivariate(ScenarioId id);

// Draw one sample of size n. Pure functions of (id, n, seed).
PairedSample generate_uni(ScenarioId id, std::size_t n, std::uint64_t seed);
MultiSample generate_mv(ScenarioId id, std::size_t n, std::uint64_t seed);

// One test inside an experiment: either a univariate method or a
// multivariate method with its backend mode.
struct TestSpec {
  std::optional<UniMethod> uni;
  std::optional<MvMethod> mv;
  MvMode mode = MvMode::grothe_permutation;

  std::string label() const;
};

TestSpec uni_test_spec(UniMethod method);
TestSpec mv_test_spec(MvMethod method, MvMode mode = MvMode::grothe_permutation);

// multivariate=false parses univariate method names; multivariate=true
// parses "method" or "method@mode" (mode defaults to grothe).
std::optional<TestSpec> parse_test_spec(std::string_view name, bool multivariate);

struct RunnerOptions {
  double alpha = 0.05;
  std::int64_t permutations = 500;  // B for permutation-mode tests
  int workers = 1;                  // across replications
  ComponentScaling scaling = ComponentScaling::standardized;
  BorelConfig borel;
  bool self_inclusion = false;
};

struct RejectionRate {
  std::string test;
  std::int64_t rejections = 0;
  std::int64_t reps = 0;
  double rate = 0.0;
  double mc_se = 0.0;  // sqrt(rate (1 - rate) / reps)
};

// Outputs are pure functions of the inputs; nothing here depends on worker
// count or wall-clock state.
struct ExperimentReport {
  std::string scenario;
  std::int64_t n = 0;
  std::int64_t reps = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> permutations;  // set when permutation tests ran
  std::vector<RejectionRate> rates;
};

// Rejection rates at nominal level alpha over reps independent samples of
// the scenario. Needs reps >= 1000. The test list must match the scenario
// family (univariate or multivariate).
ExperimentReport run_power(const std::vector<TestSpec>& tests, ScenarioId scenario,
                           std::size_t n, std::int64_t reps, std::uint64_t seed,
                           const RunnerOptions& options = {});

// run_power on the null design matching the test family.
ExperimentReport run_size(const std::vector<TestSpec>& tests, std::size_t n,
                          std::int64_t reps, std::uint64_t seed,
                          const RunnerOptions& options = {});

// Statistic pairs drawn under independence, for external plotting. The
// univariate design is X ~ Uniform[0,1], Y ~ N(0,1); the multivariate pairs
// use p = q = 3 with the same margins, dominance-count monotone statistics,
// and the merged-scalar xi.
enum class ScatterPair { tau_xi, q_xi, s_xi, mv_s_xi, mv_tau_xi };

std::optional<ScatterPair> parse_scatter_pair(std::string_view name);
const char* to_string(ScatterPair pair);

struct ScatterTable {
  std::string pair;
  std::string first;   // column name of rows[r][0]
  std::string second;  // column name of rows[r][1]
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::array<double, 2>> rows;
};

// Needs reps >= 100.
ScatterTable null_scatter(ScatterPair pair, std::size_t n, std::int64_t reps,
                          std::uint64_t seed, int workers = 1);

}  // namespace rcor
