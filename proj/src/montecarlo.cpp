#include "rcor/montecarlo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rcor/rng.hpp"
#include "rcor/unistat.hpp"

namespace rcor {

std::optional<ScenarioId> parse_scenario(std::string_view name) {
  if (name == "U1" || name == "u1" || name == "linear") return ScenarioId::U1;
  if (name == "U2" || name == "u2" || name == "quadratic") return ScenarioId::U2;
  if (name == "U3" || name == "u3" || name == "stepwise") return ScenarioId::U3;
  if (name == "U4" || name == "u4" || name == "sinusoid") return ScenarioId::U4;
  if (name == "null_uni" || name == "null-uni") return ScenarioId::null_uni;
  if (name == "M1" || name == "m1") return ScenarioId::M1;
  if (name == "M2" || name == "m2") return ScenarioId::M2;
  if (name == "M3" || name == "m3") return ScenarioId::M3;
  if (name == "M4" || name == "m4") return ScenarioId::M4;
  if (name == "M5" || name == "m5") return ScenarioId::M5;
  if (name == "M6" || name == "m6") return ScenarioId::M6;
  if (name == "null_mv" || name == "null-mv") return ScenarioId::null_mv;
  return std::nullopt;
}

const char* to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::U1: return "U1";
    case ScenarioId::U2: return "U2";
    case ScenarioId::U3: return "U3";
    case ScenarioId::U4: return "U4";
    case ScenarioId::null_uni: return "null_uni";
    case ScenarioId::M1: return "M1";
    case ScenarioId::M2: return "M2";
    case ScenarioId::M3: return "M3";
    case ScenarioId::M4: return "M4";
    case ScenarioId::M5: return "M5";
    case ScenarioId::M6: return "M6";
    case ScenarioId::null_mv: return "null_mv";
  }
  return "unknown";
}

bool is_multivariate(ScenarioId id) {
  switch (id) {
    case ScenarioId::M1:
    case ScenarioId::M2:
    case ScenarioId::M3:
    case ScenarioId::M4:
    case ScenarioId::M5:
    case ScenarioId::M6:
    case ScenarioId::null_mv:
      return true;
    default:
      return false;
  }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double stepwise_level(double x) {
  if (x <= -0.5) return 1.0;
  if (x <= 0.0) return 2.0;
  if (x <= 0.5) return 3.0;
  return 4.0;
}

}  // namespace

PairedSample generate_uni(ScenarioId id, std::size_t n, std::uint64_t seed) {
  if (is_multivariate(id)) {
    throw std::invalid_argument("generate_uni: multivariate scenario");
  }
  if (n < 2) throw std::invalid_argument("generate_uni: need n >= 2");

  Rng rng(seed);
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(-1.0, 1.0);
    switch (id) {
      case ScenarioId::U1:
        y[i] = x[i] + rng.normal();
        break;
      case ScenarioId::U2:
        y[i] = x[i] * x[i] + 0.3 * rng.normal();
        break;
      case ScenarioId::U3:
        y[i] = stepwise_level(x[i]) + 2.0 * rng.normal();
        break;
      case ScenarioId::U4:
        y[i] = std::cos(kTwoPi * x[i]) + 0.75 * rng.normal();
        break;
      case ScenarioId::null_uni:
        y[i] = rng.normal();
        break;
      default:
        throw std::invalid_argument("generate_uni: unknown scenario");
    }
  }
  return PairedSample(std::move(x), std::move(y));
}

MultiSample generate_mv(ScenarioId id, std::size_t n, std::uint64_t seed) {
  if (!is_multivariate(id)) {
    throw std::invalid_argument("generate_mv: univariate scenario");
  }
  if (n < 2) throw std::invalid_argument("generate_mv: need n >= 2");

  Rng rng(seed);
  Matrix x(n, 3);
  Matrix y(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
    switch (id) {
      case ScenarioId::M1:
        x1 = rng.uniform(0.0, 1.0);
        x2 = rng.uniform(0.0, 1.0);
        x3 = rng.uniform(0.0, 1.0);
        break;
      case ScenarioId::M3:
        x1 = rng.uniform(0.0, 2.0);
        x2 = rng.uniform(0.0, 2.0);
        x3 = rng.uniform(0.0, 2.0);
        break;
      case ScenarioId::M4:
      case ScenarioId::M5:
        x1 = rng.uniform(-2.0, 2.0);
        x2 = rng.uniform(-2.0, 2.0);
        x3 = rng.uniform(-2.0, 2.0);
        break;
      default:  // M2, M6, null_mv
        x1 = rng.uniform(-1.0, 1.0);
        x2 = rng.uniform(-1.0, 1.0);
        x3 = rng.uniform(-1.0, 1.0);
        break;
    }
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double z3 = rng.normal();

    x(i, 0) = x1;
    x(i, 1) = x2;
    x(i, 2) = x3;
    switch (id) {
      case ScenarioId::M1:
        y(i, 0) = x1 - x2 + 2.0 * x3 + 2.0 * z1;
        y(i, 1) = -x1 + 3.0 * x2 - 0.5 * x3 + 2.0 * z2;
        y(i, 2) = 1.5 * x1 + x2 + 2.0 * x3 + 2.0 * z3;
        break;
      case ScenarioId::M2:
        y(i, 0) = 3.0 * x1 + 4.0 * z1;
        y(i, 1) = x2 + 2.0 * z2;
        y(i, 2) = 2.0 * x3 + 3.0 * z3;
        break;
      case ScenarioId::M3:
        y(i, 0) = x2 + 2.0 * x3 + 4.0 * z1;
        y(i, 1) = 2.0 * x1 + 0.5 * x3 + 4.0 * z2;
        y(i, 2) = x1 + 3.0 * x2 + 4.0 * z3;
        break;
      case ScenarioId::M4:
        y(i, 0) = 2.0 * x1 * x1 + 4.0 * std::abs(x2) + std::cos(kTwoPi * x3) +
                  2.0 * z1;
        y(i, 1) = 2.0 * std::cos(kTwoPi * x1) + 3.0 * x2 * x2 + std::abs(x3) +
                  2.0 * z2;
        y(i, 2) = 3.0 * std::abs(x1) + 2.0 * std::cos(kTwoPi * x2) +
                  2.0 * x3 * x3 + 2.0 * z3;
        break;
      case ScenarioId::M5:
        y(i, 0) = 2.0 * x1 * x1 + 5.0 * z1;
        y(i, 1) = 4.0 * x2 * x2 + 5.0 * z2;
        y(i, 2) = 6.0 * x3 * x3 + 5.0 * z3;
        break;
      case ScenarioId::M6:
        y(i, 0) = std::cos(kTwoPi * x1) + 0.5 * z1;
        y(i, 1) = std::cos(2.0 * kTwoPi * x2) + 0.5 * z2;
        y(i, 2) = std::cos(3.0 * kTwoPi * x3) + 0.5 * z3;
        break;
      case ScenarioId::null_mv:
        y(i, 0) = z1;
        y(i, 1) = z2;
        y(i, 2) = z3;
        break;
      default:
        throw std::invalid_argument("generate_mv: unknown scenario");
    }
  }
  return MultiSample(std::move(x), std::move(y));
}

std::string TestSpec::label() const {
  if (uni.has_value()) return to_string(*uni);
  if (mv.has_value()) return std::string(to_string(*mv)) + "@" + to_string(mode);
  return "unset";
}

TestSpec uni_test_spec(UniMethod method) {
  TestSpec spec;
  spec.uni = method;
  return spec;
}

TestSpec mv_test_spec(MvMethod method, MvMode mode) {
  TestSpec spec;
  spec.mv = method;
  spec.mode = mode;
  return spec;
}

std::optional<TestSpec> parse_test_spec(std::string_view name, bool multivariate) {
  if (!multivariate) {
    const auto method = parse_uni_method(name);
    if (!method.has_value()) return std::nullopt;
    return uni_test_spec(*method);
  }
  std::string_view method_part = name;
  MvMode mode = MvMode::grothe_permutation;
  if (const auto at = name.find('@'); at != std::string_view::npos) {
    method_part = name.substr(0, at);
    const auto parsed_mode = parse_mv_mode(name.substr(at + 1));
    if (!parsed_mode.has_value()) return std::nullopt;
    mode = *parsed_mode;
  }
  const auto method = parse_mv_method(method_part);
  if (!method.has_value()) return std::nullopt;
  return mv_test_spec(*method, mode);
}

namespace {

ExperimentReport run_core(const std::vector<TestSpec>& tests, ScenarioId scenario,
                          std::size_t n, std::int64_t reps, std::uint64_t seed,
                          const RunnerOptions& options) {
  if (reps < 1000) {
    throw std::invalid_argument("experiment runners need at least 1000 replications");
  }
  if (tests.empty()) throw std::invalid_argument("no tests given");
  if (!(options.alpha > 0.0) || !(options.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  const bool multivariate = is_multivariate(scenario);
  bool any_permutation = false;
  for (const auto& t : tests) {
    if (multivariate != t.mv.has_value() || multivariate == t.uni.has_value()) {
      throw std::invalid_argument("test list does not match the scenario family");
    }
    if (multivariate && t.mode != MvMode::borel_analytic) any_permutation = true;
  }

  const std::size_t t_count = tests.size();
  std::vector<std::uint8_t> reject(static_cast<std::size_t>(reps) * t_count, 0);

  parallel_for(reps, options.workers, [&](std::int64_t r) {
    const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    const std::uint64_t data_seed = derive_seed(rep_seed, 1);
    const std::uint64_t tie_seed = derive_seed(rep_seed, 2);
    std::uint8_t* slot = reject.data() + static_cast<std::size_t>(r) * t_count;

    if (multivariate) {
      const MultiSample sample = generate_mv(scenario, n, data_seed);
      for (std::size_t t = 0; t < t_count; ++t) {
        MvOptions mopts;
        mopts.mode = tests[t].mode;
        mopts.borel = options.borel;
        mopts.self_inclusion = options.self_inclusion;
        mopts.tie_seed = tie_seed;
        mopts.scaling = options.scaling;
        PermutationPlan plan;
        plan.permutations = options.permutations;
        plan.master_seed = derive_seed(rep_seed, 3 + static_cast<std::uint64_t>(t));
        plan.workers = 1;
        const TestOutcome out = mv_test(sample, *tests[t].mv, mopts, plan);
        slot[t] = out.p_value <= options.alpha ? 1 : 0;
      }
    } else {
      const PairedSample sample = generate_uni(scenario, n, data_seed);
      for (std::size_t t = 0; t < t_count; ++t) {
        CombinedOptions copts;
        copts.scaling = options.scaling;
        copts.tie_seed = tie_seed;
        const TestOutcome out = univariate_test(sample, *tests[t].uni, copts);
        slot[t] = out.p_value <= options.alpha ? 1 : 0;
      }
    }
  });

  ExperimentReport report;
  report.scenario = to_string(scenario);
  report.n = static_cast<std::int64_t>(n);
  report.reps = reps;
  report.alpha = options.alpha;
  report.seed = seed;
  if (any_permutation) report.permutations = options.permutations;
  report.rates.reserve(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    RejectionRate rr;
    rr.test = tests[t].label();
    rr.reps = reps;
    for (std::int64_t r = 0; r < reps; ++r) {
      rr.rejections += reject[static_cast<std::size_t>(r) * t_count + t];
    }
    rr.rate = static_cast<double>(rr.rejections) / static_cast<double>(reps);
    rr.mc_se = std::sqrt(rr.rate * (1.0 - rr.rate) / static_cast<double>(reps));
    report.rates.push_back(std::move(rr));
  }
  return report;
}

}  // namespace

ExperimentReport run_power(const std::vector<TestSpec>& tests, ScenarioId scenario,
                           std::size_t n, std::int64_t reps, std::uint64_t seed,
                           const RunnerOptions& options) {
  return run_core(tests, scenario, n, reps, seed, options);
}

ExperimentReport run_size(const std::vector<TestSpec>& tests, std::size_t n,
                          std::int64_t reps, std::uint64_t seed,
                          const RunnerOptions& options) {
  bool any_uni = false;
  bool any_mv = false;
  for (const auto& t : tests) {
    any_uni = any_uni || t.uni.has_value();
    any_mv = any_mv || t.mv.has_value();
  }
  if (any_uni && any_mv) {
    throw std::invalid_argument("run_size: univariate and multivariate tests mixed");
  }
  if (!any_uni && !any_mv) throw std::invalid_argument("run_size: no tests given");
  return run_core(tests, any_mv ? ScenarioId::null_mv : ScenarioId::null_uni, n,
                  reps, seed, options);
}

std::optional<ScatterPair> parse_scatter_pair(std::string_view name) {
  if (name == "tau-xi" || name == "tau_xi") return ScatterPair::tau_xi;
  if (name == "q-xi" || name == "q_xi") return ScatterPair::q_xi;
  if (name == "s-xi" || name == "s_xi") return ScatterPair::s_xi;
  if (name == "mv-s-xi" || name == "mv_s_xi") return ScatterPair::mv_s_xi;
  if (name == "mv-tau-xi" || name == "mv_tau_xi") return ScatterPair::mv_tau_xi;
  return std::nullopt;
}

const char* to_string(ScatterPair pair) {
  switch (pair) {
    case ScatterPair::tau_xi: return "tau-xi";
    case ScatterPair::q_xi: return "q-xi";
    case ScatterPair::s_xi: return "s-xi";
    case ScatterPair::mv_s_xi: return "mv-s-xi";
    case ScatterPair::mv_tau_xi: return "mv-tau-xi";
  }
  return "unknown";
}

ScatterTable null_scatter(ScatterPair pair, std::size_t n, std::int64_t reps,
                          std::uint64_t seed, int workers) {
  if (reps < 100) throw std::invalid_argument("null_scatter: need reps >= 100");
  if (n < 3) throw std::invalid_argument("null_scatter: need n >= 3");

  const bool multivariate =
      pair == ScatterPair::mv_s_xi || pair == ScatterPair::mv_tau_xi;

  ScatterTable table;
  table.pair = to_string(pair);
  table.n = static_cast<std::int64_t>(n);
  table.seed = seed;
  switch (pair) {
    case ScatterPair::tau_xi: table.first = "kendall"; break;
    case ScatterPair::q_xi: table.first = "quadrant"; break;
    case ScatterPair::s_xi: table.first = "spearman"; break;
    case ScatterPair::mv_s_xi: table.first = "spearman"; break;
    case ScatterPair::mv_tau_xi: table.first = "kendall"; break;
  }
  table.second = "xi";
  table.rows.assign(static_cast<std::size_t>(reps), {0.0, 0.0});

  parallel_for(reps, workers, [&](std::int64_t r) {
    const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    const std::uint64_t data_seed = derive_seed(rep_seed, 1);
    const std::uint64_t tie_seed = derive_seed(rep_seed, 2);
    Rng rng(data_seed);

    if (!multivariate) {
      std::vector<double> x(n);
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(0.0, 1.0);
        y[i] = rng.normal();
      }
      const PairedSample sample(std::move(x), std::move(y));
      const RankProfile profile = concomitant_profile(sample, tie_seed);
      double first = 0.0;
      switch (pair) {
        case ScatterPair::tau_xi:
          first = kendall_from_concomitant(profile.concomitant_ranks);
          break;
        case ScatterPair::q_xi:
          first = quadrant(sample);
          break;
        default:
          first = spearman_from_concomitant(profile.concomitant_ranks);
          break;
      }
      table.rows[static_cast<std::size_t>(r)] = {
          first, xi_from_concomitant(profile.concomitant_ranks)};
    } else {
      Matrix mx(n, 3);
      Matrix my(n, 3);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) mx(i, j) = rng.uniform(0.0, 1.0);
        for (std::size_t j = 0; j < 3; ++j) my(i, j) = rng.normal();
      }
      const MultiSample sample(std::move(mx), std::move(my));
      const MultiRankProfile profile = multivariate_ranks(sample, false);
      const double first = pair == ScatterPair::mv_s_xi ? grothe_spearman(profile)
                                                        : grothe_tau(profile);
      table.rows[static_cast<std::size_t>(r)] = {
          first, borel_stat(sample, MergedStat::xi, BorelConfig{}, tie_seed)};
    }
  });
  return table;
}

}  // namespace rcor
