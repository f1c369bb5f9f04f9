#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rcor/error.hpp"
#include "rcor/io.hpp"
#include "rcor/rng.hpp"

namespace {

using namespace rcor;

// Exit codes: 0 ok, 1 unexpected, 2 usage, 3 file I/O, 4 degenerate
// statistic, 5 malformed data, 6 not enough rows.
struct insufficient_rows : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t sample_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

ComponentScaling parse_scaling(const std::string& name) {
  if (name == "standardized") return ComponentScaling::standardized;
  if (name == "finite-sample" || name == "finite_sample") {
    return ComponentScaling::finite_sample;
  }
  if (name == "printed") return ComponentScaling::printed;
  throw std::invalid_argument("unknown scaling '" + name + "'");
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_text_file(output, text);
  }
}

std::string render(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct OutputConfig {
  std::string format = "json";
  std::string output;
};

void add_output_flags(CLI::App* cmd, OutputConfig& cfg) {
  cmd->add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--output", cfg.output, "Write to this file instead of stdout");
}

void require_rows(const CsvTable& table) {
  if (table.rows() < 2) {
    throw insufficient_rows("input needs at least 2 data rows, got " +
                            std::to_string(table.rows()));
  }
}

struct TestConfig {
  std::string input;
  std::string columns = "0,1";
  std::string method = "cs";
  std::string scaling = "standardized";
  std::uint64_t seed = 0;
  bool seed_given = false;
  OutputConfig out;
};

int cmd_test(const TestConfig& cfg) {
  const CsvTable table = read_csv_file(cfg.input);
  const auto selectors = split_list(cfg.columns);
  if (selectors.size() != 2) {
    throw std::invalid_argument("--columns needs exactly two entries");
  }
  const auto idx = resolve_columns(table, selectors);
  require_rows(table);

  const auto method = parse_uni_method(cfg.method);
  if (!method.has_value()) {
    throw std::invalid_argument("unknown method '" + cfg.method + "'");
  }
  const std::uint64_t seed = cfg.seed_given ? cfg.seed : sample_seed();

  CombinedOptions options;
  options.scaling = parse_scaling(cfg.scaling);
  options.tie_seed = derive_seed(seed, 1);

  const PairedSample sample(table.columns[idx[0]], table.columns[idx[1]]);
  TestOutcome outcome = univariate_test(sample, *method, options);
  outcome.seed = seed;

  emit(cfg.out.format == "json" ? render(to_json(outcome)) : to_csv(outcome),
       cfg.out.output);
  return 0;
}

struct MvTestConfig {
  std::string input;
  std::string columns_x;
  std::string columns_y;
  std::string method = "ck";
  std::string mode = "grothe";
  std::string scaling = "standardized";
  std::int64_t permutations = 1000;
  int workers = 1;
  bool self_inclusion = false;
  int integer_bits = 16;
  int fractional_bits = 32;
  std::uint64_t seed = 0;
  bool seed_given = false;
  OutputConfig out;
};

int cmd_mvtest(const MvTestConfig& cfg) {
  const CsvTable table = read_csv_file(cfg.input);
  const auto sx = split_list(cfg.columns_x);
  const auto sy = split_list(cfg.columns_y);
  const auto ix = resolve_columns(table, sx);
  const auto iy = resolve_columns(table, sy);
  for (const auto a : ix) {
    for (const auto b : iy) {
      if (a == b) {
        throw std::invalid_argument("--columns-x and --columns-y overlap");
      }
    }
  }
  require_rows(table);

  const auto method = parse_mv_method(cfg.method);
  if (!method.has_value()) {
    throw std::invalid_argument("unknown method '" + cfg.method + "'");
  }
  const auto mode = parse_mv_mode(cfg.mode);
  if (!mode.has_value()) {
    throw std::invalid_argument("unknown mode '" + cfg.mode + "'");
  }
  const std::uint64_t seed = cfg.seed_given ? cfg.seed : sample_seed();

  const std::size_t rows = table.rows();
  Matrix mx(rows, ix.size());
  Matrix my(rows, iy.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < ix.size(); ++c) mx(i, c) = table.columns[ix[c]][i];
    for (std::size_t c = 0; c < iy.size(); ++c) my(i, c) = table.columns[iy[c]][i];
  }
  const MultiSample sample(std::move(mx), std::move(my));

  MvOptions options;
  options.mode = *mode;
  options.borel.integer_bits = cfg.integer_bits;
  options.borel.fractional_bits = cfg.fractional_bits;
  options.self_inclusion = cfg.self_inclusion;
  options.tie_seed = derive_seed(seed, 1);
  options.scaling = parse_scaling(cfg.scaling);

  PermutationPlan plan;
  plan.permutations = cfg.permutations;
  plan.master_seed = derive_seed(seed, 2);
  plan.workers = cfg.workers;

  TestOutcome outcome = mv_test(sample, *method, options, plan);
  outcome.seed = seed;

  emit(cfg.out.format == "json" ? render(to_json(outcome)) : to_csv(outcome),
       cfg.out.output);
  return 0;
}

struct SimulateConfig {
  std::string scenario;
  std::string tests;
  std::size_t n = 0;
  std::int64_t reps = 1000;
  double alpha = 0.05;
  std::int64_t permutations = 500;
  int workers = 1;
  std::string scaling = "standardized";
  bool self_inclusion = false;
  int integer_bits = 16;
  int fractional_bits = 32;
  std::uint64_t seed = 0;
  bool seed_given = false;
  OutputConfig out;
};

int cmd_simulate(const SimulateConfig& cfg) {
  const auto scenario = parse_scenario(cfg.scenario);
  if (!scenario.has_value()) {
    throw std::invalid_argument("unknown scenario '" + cfg.scenario + "'");
  }
  const bool multivariate = is_multivariate(*scenario);

  std::string tests = cfg.tests;
  if (tests.empty()) {
    tests = multivariate ? "xisym,spearman,kendall,cs,ck" : "cs,ck,cq,xisym";
  }
  std::vector<TestSpec> specs;
  for (const auto& token : split_list(tests)) {
    const auto spec = parse_test_spec(token, multivariate);
    if (!spec.has_value()) {
      throw std::invalid_argument("unknown test '" + token + "' for this scenario");
    }
    specs.push_back(*spec);
  }

  const std::uint64_t seed = cfg.seed_given ? cfg.seed : sample_seed();

  RunnerOptions options;
  options.alpha = cfg.alpha;
  options.permutations = cfg.permutations;
  options.workers = cfg.workers;
  options.scaling = parse_scaling(cfg.scaling);
  options.borel.integer_bits = cfg.integer_bits;
  options.borel.fractional_bits = cfg.fractional_bits;
  options.self_inclusion = cfg.self_inclusion;

  const ExperimentReport report =
      run_power(specs, *scenario, cfg.n, cfg.reps, seed, options);

  emit(cfg.out.format == "json" ? render(to_json(report)) : to_csv(report),
       cfg.out.output);
  return 0;
}

struct ScatterConfig {
  std::string pair;
  std::size_t n = 0;
  std::int64_t reps = 1000;
  int workers = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  OutputConfig out;
};

int cmd_scatter(const ScatterConfig& cfg) {
  const auto pair = parse_scatter_pair(cfg.pair);
  if (!pair.has_value()) {
    throw std::invalid_argument("unknown statistic pair '" + cfg.pair + "'");
  }
  const std::uint64_t seed = cfg.seed_given ? cfg.seed : sample_seed();
  const ScatterTable table = null_scatter(*pair, cfg.n, cfg.reps, seed, cfg.workers);
  emit(cfg.out.format == "json" ? render(to_json(table)) : to_csv(table),
       cfg.out.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-based independence tests"};
  app.require_subcommand(1);

  TestConfig test_cfg;
  auto* test = app.add_subcommand("test", "Univariate independence test on CSV data");
  test->add_option("--input", test_cfg.input, "CSV file")->required();
  test->add_option("--columns", test_cfg.columns,
                   "Two columns, by name or 0-based index (default: 0,1)");
  test->add_option("--method", test_cfg.method,
                   "xi|spearman|kendall|quadrant|cs|ck|cq|xisym|cs_asym");
  test->add_option("--scaling", test_cfg.scaling,
                   "standardized|finite-sample|printed");
  auto* test_seed =
      test->add_option("--seed", test_cfg.seed, "Tie-break seed (sampled when omitted)");
  add_output_flags(test, test_cfg.out);

  MvTestConfig mv_cfg;
  auto* mvtest =
      app.add_subcommand("mvtest", "Multivariate independence test on CSV data");
  mvtest->add_option("--input", mv_cfg.input, "CSV file")->required();
  mvtest->add_option("--columns-x", mv_cfg.columns_x, "X block columns")->required();
  mvtest->add_option("--columns-y", mv_cfg.columns_y, "Y block columns")->required();
  mvtest->add_option("--method", mv_cfg.method, "xisym|spearman|kendall|cs|ck");
  mvtest->add_option("--mode", mv_cfg.mode,
                     "grothe|borel-analytic|borel-permutation");
  mvtest->add_option("--permutations", mv_cfg.permutations,
                     "Permutation count (>= 100)");
  mvtest->add_option("--workers", mv_cfg.workers, "Threads for the permutation loop");
  mvtest->add_flag("--self-inclusion", mv_cfg.self_inclusion,
                   "Count each point in its own dominance rank");
  mvtest->add_option("--integer-bits", mv_cfg.integer_bits,
                     "Integer bits per coordinate in the binary merge");
  mvtest->add_option("--fractional-bits", mv_cfg.fractional_bits,
                     "Fractional bits per coordinate in the binary merge");
  mvtest->add_option("--scaling", mv_cfg.scaling,
                     "standardized|finite-sample|printed");
  auto* mv_seed =
      mvtest->add_option("--seed", mv_cfg.seed, "Master seed (sampled when omitted)");
  add_output_flags(mvtest, mv_cfg.out);

  SimulateConfig sim_cfg;
  auto* simulate =
      app.add_subcommand("simulate", "Size/power study on a built-in scenario");
  simulate->add_option("--scenario", sim_cfg.scenario,
                       "U1|U2|U3|U4|null_uni|M1..M6|null_mv")
      ->required();
  simulate->add_option("--tests", sim_cfg.tests,
                       "Comma-separated tests; multivariate entries accept "
                       "method@mode (default mode: grothe)");
  simulate->add_option("--n", sim_cfg.n, "Sample size per replication")->required();
  simulate->add_option("--reps", sim_cfg.reps, "Replications (>= 1000)");
  simulate->add_option("--alpha", sim_cfg.alpha, "Nominal level");
  simulate->add_option("--permutations", sim_cfg.permutations,
                       "Permutations per multivariate test");
  simulate->add_option("--workers", sim_cfg.workers, "Threads across replications");
  simulate->add_option("--scaling", sim_cfg.scaling,
                       "standardized|finite-sample|printed");
  simulate->add_flag("--self-inclusion", sim_cfg.self_inclusion,
                     "Count each point in its own dominance rank");
  simulate->add_option("--integer-bits", sim_cfg.integer_bits,
                       "Integer bits per coordinate in the binary merge");
  simulate->add_option("--fractional-bits", sim_cfg.fractional_bits,
                       "Fractional bits per coordinate in the binary merge");
  auto* sim_seed =
      simulate->add_option("--seed", sim_cfg.seed, "Master seed (sampled when omitted)");
  add_output_flags(simulate, sim_cfg.out);

  ScatterConfig scatter_cfg;
  auto* scatter =
      app.add_subcommand("scatter", "Paired null statistics for plotting");
  scatter->add_option("--pair", scatter_cfg.pair,
                      "tau-xi|q-xi|s-xi|mv-s-xi|mv-tau-xi")
      ->required();
  scatter->add_option("--n", scatter_cfg.n, "Sample size per replication")->required();
  scatter->add_option("--reps", scatter_cfg.reps, "Replications (>= 100)");
  scatter->add_option("--workers", scatter_cfg.workers, "Threads across replications");
  auto* scatter_seed = scatter->add_option("--seed", scatter_cfg.seed,
                                           "Master seed (sampled when omitted)");
  add_output_flags(scatter, scatter_cfg.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  test_cfg.seed_given = test_seed->count() > 0;
  mv_cfg.seed_given = mv_seed->count() > 0;
  sim_cfg.seed_given = sim_seed->count() > 0;
  scatter_cfg.seed_given = scatter_seed->count() > 0;

  try {
    if (test->parsed()) return cmd_test(test_cfg);
    if (mvtest->parsed()) return cmd_mvtest(mv_cfg);
    if (simulate->parsed()) return cmd_simulate(sim_cfg);
    if (scatter->parsed()) return cmd_scatter(scatter_cfg);
    std::fprintf(stderr, "error: no command given\n");
    return 2;
  } catch (const insufficient_rows& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 6;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const parse_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const degenerate_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
