#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "rcor/error.hpp"
#include "rcor/io.hpp"
#include "rcor/rng.hpp"

using namespace rcor;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

CommandResult run_cli(const std::string& args) {
  const std::string command = std::string(RCOR_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  CommandResult result;
  if (pipe == nullptr) return result;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) {
    result.output.append(buffer, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

class TempFile {
 public:
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("rcor_test_" + std::to_string(getpid()) + "_" +
              std::to_string(counter++) + ".csv"))
                .string();
    std::ofstream out(path_, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::filesystem::remove(path_); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string bivariate_csv(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::string text = "x,y\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(0.0, 1.0);
    const double y = x * x + 0.1 * rng.normal();
    text += format_double(x) + "," + format_double(y) + "\n";
  }
  return text;
}

}  // namespace

TEST_CASE("parse_csv detects headers and reads columns") {
  const auto with_header = parse_csv("x,y\n1,2\n3,4\n");
  CHECK(with_header.names == std::vector<std::string>{"x", "y"});
  CHECK(with_header.rows() == 2);
  CHECK(with_header.columns[0] == std::vector<double>{1.0, 3.0});
  CHECK(with_header.columns[1] == std::vector<double>{2.0, 4.0});

  const auto headerless = parse_csv("1,2\n3,4\n");
  CHECK(headerless.names.empty());
  CHECK(headerless.rows() == 2);

  const auto bom = parse_csv("\xef\xbb\xbfx,y\n1,2\n5,6\n");
  CHECK(bom.names == std::vector<std::string>{"x", "y"});

  const auto blanks = parse_csv("x,y\n\n1,2\n\n\n3,4\n");
  CHECK(blanks.rows() == 2);

  const auto spaced = parse_csv(" x , y \n 1 , 2 \n");
  CHECK(spaced.names == std::vector<std::string>{"x", "y"});
  CHECK(spaced.columns[0][0] == 1.0);
}

TEST_CASE("parse_csv reports malformed input with positions") {
  CHECK_THROWS_AS(parse_csv(""), parse_error);
  CHECK_THROWS_AS(parse_csv("\n\n"), parse_error);
  CHECK_THROWS_AS(parse_csv("x,y\n1,2\n3\n"), parse_error);
  CHECK_THROWS_AS(parse_csv("x,y\n1,two\n"), parse_error);
  CHECK_THROWS_WITH(parse_csv("x,y\n1,2\n3\n"),
                    doctest::Contains("line 3"));
  CHECK_THROWS_WITH(parse_csv("x,y\n1,two\n"),
                    doctest::Contains("column 2"));
}

TEST_CASE("read_csv_file raises io_error for missing paths") {
  CHECK_THROWS_AS(read_csv_file("/nonexistent/nowhere.csv"), io_error);
}

TEST_CASE("format_double round-trips exactly") {
  const std::vector<double> values = {0.0,       -0.0,   0.1,     1.0 / 3.0,
                                      1e300,     -1e-8,  12345.678, 2.5,
                                      0x1.fffffffffffffp+1};
  for (const double v : values) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(2.5) == "2.5");
  CHECK(format_double(100.0) == "100");
}

TEST_CASE("split_list trims and rejects empty tokens") {
  CHECK(split_list("a, b ,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_list("x") == std::vector<std::string>{"x"});
  CHECK_THROWS_AS(split_list("a,,b"), std::invalid_argument);
  CHECK_THROWS_AS(split_list(""), std::invalid_argument);
}

TEST_CASE("resolve_columns accepts names and indices") {
  const auto table = parse_csv("alpha,beta\n1,2\n3,4\n");
  CHECK(resolve_columns(table, std::vector<std::string>{"beta", "alpha"}) ==
        std::vector<std::size_t>{1, 0});
  CHECK(resolve_columns(table, std::vector<std::string>{"0", "1"}) ==
        std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(resolve_columns(table, std::vector<std::string>{"gamma"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(resolve_columns(table, std::vector<std::string>{"7"}),
                  std::invalid_argument);

  const auto headerless = parse_csv("1,2\n3,4\n");
  CHECK_THROWS_AS(resolve_columns(headerless, std::vector<std::string>{"x"}),
                  std::invalid_argument);
}

TEST_CASE("test outcomes round-trip through JSON") {
  TestOutcome outcome;
  outcome.method = "ck";
  outcome.statistic = 1.25;
  outcome.p_value = 0.0375;
  outcome.p_source = PValueSource::permutation;
  outcome.n = 64;
  outcome.components = {{"kendall", 1.25}, {"xi_xy", 0.4}, {"xi_yx", 0.3}};
  outcome.mode = "grothe";
  outcome.seed = 123456789;
  outcome.permutations = 999;
  outcome.degenerate_replicates = 2;
  outcome.null_sd = 0.497;

  const auto restored = test_outcome_from_json(to_json(outcome));
  CHECK(restored.method == outcome.method);
  CHECK(restored.statistic == outcome.statistic);
  CHECK(restored.p_value == outcome.p_value);
  CHECK(restored.p_source == outcome.p_source);
  CHECK(restored.n == outcome.n);
  CHECK(restored.components == outcome.components);
  CHECK(restored.mode == outcome.mode);
  CHECK(restored.seed == outcome.seed);
  CHECK(restored.permutations == outcome.permutations);
  CHECK(restored.degenerate_replicates == outcome.degenerate_replicates);
  CHECK(restored.null_sd == outcome.null_sd);

  TestOutcome bare;
  bare.method = "xi";
  bare.n = 10;
  const auto bare_restored = test_outcome_from_json(to_json(bare));
  CHECK_FALSE(bare_restored.mode.has_value());
  CHECK_FALSE(bare_restored.seed.has_value());
  CHECK_FALSE(bare_restored.null_sd.has_value());

  auto tampered = to_json(outcome);
  tampered["schema_version"] = 99;
  CHECK_THROWS_AS(test_outcome_from_json(tampered), parse_error);
}

TEST_CASE("experiment reports round-trip through JSON") {
  ExperimentReport report;
  report.scenario = "U2";
  report.n = 100;
  report.reps = 5000;
  report.alpha = 0.05;
  report.seed = 42;
  report.permutations = 500;
  report.rates = {{"ck", 4700, 5000, 0.94, 0.00336}, {"cs", 4400, 5000, 0.88, 0.0046}};

  const auto restored = experiment_report_from_json(to_json(report));
  CHECK(restored.scenario == report.scenario);
  CHECK(restored.n == report.n);
  CHECK(restored.reps == report.reps);
  CHECK(restored.seed == report.seed);
  CHECK(restored.permutations == report.permutations);
  REQUIRE(restored.rates.size() == 2);
  CHECK(restored.rates[1].test == "cs");
  CHECK(restored.rates[1].rejections == 4400);
  CHECK(restored.rates[1].rate == 0.88);
}

TEST_CASE("csv renderings carry the data") {
  TestOutcome outcome;
  outcome.method = "cs";
  outcome.statistic = 2.0;
  outcome.p_value = 0.001;
  outcome.n = 30;
  outcome.components = {{"spearman", 2.0}};
  const std::string csv = to_csv(outcome);
  CHECK(csv.find("method,cs") != std::string::npos);
  CHECK(csv.find("component.spearman,2") != std::string::npos);

  ExperimentReport report;
  report.scenario = "null_uni";
  report.n = 50;
  report.reps = 1000;
  report.alpha = 0.05;
  report.seed = 7;
  report.rates = {{"xisym", 48, 1000, 0.048, 0.00676}};
  const std::string report_csv = to_csv(report);
  CHECK(report_csv.find("scenario,n,reps,alpha,seed,permutations,test,"
                        "rejections,rate,mc_se") != std::string::npos);
  CHECK(report_csv.find("null_uni,50,1000,0.05,7,,xisym,48,0.048") !=
        std::string::npos);
}

TEST_CASE("cli runs a univariate test end to end") {
  const TempFile csv(bivariate_csv(60, 9));
  const auto result =
      run_cli("test --input " + csv.path() + " --method cq --seed 31");
  REQUIRE(result.exit_code == 0);
  const auto j = nlohmann::json::parse(result.output);
  CHECK(j.at("method") == "cq");
  CHECK(j.at("n") == 60);
  CHECK(j.at("seed") == 31);
  CHECK(j.at("p_value").get<double>() < 0.01);
  CHECK(j.at("p_source") == "analytic");
}

TEST_CASE("cli samples and records a seed when none is given") {
  const TempFile csv(bivariate_csv(40, 10));
  const auto result = run_cli("test --input " + csv.path() + " --method xi");
  REQUIRE(result.exit_code == 0);
  const auto j = nlohmann::json::parse(result.output);
  CHECK(j.contains("seed"));
  CHECK(j.at("seed").is_number_unsigned());
}

TEST_CASE("cli exit codes distinguish the failure modes") {
  const TempFile good(bivariate_csv(20, 11));

  SUBCASE("usage errors exit 2") {
    CHECK(run_cli("test --input " + good.path() + " --method bogus").exit_code == 2);
    CHECK(run_cli("test").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("test --input " + good.path() + " --columns x").exit_code == 2);
    const auto overlap = run_cli("mvtest --input " + good.path() +
                                 " --columns-x 0 --columns-y 0");
    CHECK(overlap.exit_code == 2);
    const auto few_perms = run_cli("mvtest --input " + good.path() +
                                   " --columns-x 0 --columns-y 1" +
                                   " --permutations 10");
    CHECK(few_perms.exit_code == 2);
    CHECK(few_perms.output.find("underpowered") != std::string::npos);
  }

  SUBCASE("unreadable files exit 3") {
    const auto result = run_cli("test --input /no/such/file.csv");
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("error:") != std::string::npos);
  }

  SUBCASE("degenerate statistics exit 4") {
    std::string constant = "x,y\n";
    for (int i = 0; i < 12; ++i) {
      constant += "5.0," + std::to_string(i) + ".25\n";
    }
    const TempFile degenerate(constant);
    const auto result = run_cli("mvtest --input " + degenerate.path() +
                                " --columns-x 0 --columns-y 1 --method kendall" +
                                " --permutations 200 --seed 4");
    CHECK(result.exit_code == 4);
  }

  SUBCASE("malformed cells exit 5") {
    const TempFile ragged("x,y\n1,2\n3\n");
    CHECK(run_cli("test --input " + ragged.path()).exit_code == 5);
    const TempFile words("x,y\n1,2\n3,oops\n");
    const auto result = run_cli("test --input " + words.path());
    CHECK(result.exit_code == 5);
    CHECK(result.output.find("line 3") != std::string::npos);
  }

  SUBCASE("too few rows exit 6") {
    const TempFile single("x,y\n1,2\n");
    CHECK(run_cli("test --input " + single.path()).exit_code == 6);
  }
}

TEST_CASE("cli asymmetric test depends on column order") {
  Rng rng(414);
  std::string text = "x,y\n";
  for (int i = 0; i < 150; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = std::cos(6.283185307179586 * x) + 0.05 * rng.normal();
    text += format_double(x) + "," + format_double(y) + "\n";
  }
  const TempFile csv(text);
  const auto forward = run_cli("test --input " + csv.path() +
                               " --method cs_asym --columns x,y --seed 1");
  const auto backward = run_cli("test --input " + csv.path() +
                                " --method cs_asym --columns y,x --seed 1");
  REQUIRE(forward.exit_code == 0);
  REQUIRE(backward.exit_code == 0);
  const double pf = nlohmann::json::parse(forward.output).at("p_value");
  const double pb = nlohmann::json::parse(backward.output).at("p_value");
  CHECK(pf < pb);
}

TEST_CASE("cli mvtest on single columns reduces to the univariate test") {
  const TempFile csv(bivariate_csv(50, 77));
  const auto uni = run_cli("test --input " + csv.path() +
                           " --method kendall --seed 3");
  const auto mv = run_cli("mvtest --input " + csv.path() +
                          " --columns-x x --columns-y y --method kendall" +
                          " --mode borel-analytic --seed 3");
  REQUIRE(uni.exit_code == 0);
  REQUIRE(mv.exit_code == 0);
  const auto ju = nlohmann::json::parse(uni.output);
  const auto jm = nlohmann::json::parse(mv.output);
  CHECK(ju.at("statistic").get<double>() ==
        doctest::Approx(jm.at("statistic").get<double>()).epsilon(1e-12));
  CHECK(ju.at("p_value").get<double>() ==
        doctest::Approx(jm.at("p_value").get<double>()).epsilon(1e-12));
}

TEST_CASE("cli simulate is byte-deterministic") {
  const std::string args =
      "simulate --scenario U2 --n 40 --reps 1000 --seed 12 --format csv";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("scenario,n,reps") != std::string::npos);
  CHECK(a.output.find("U2,40,1000") != std::string::npos);
}

TEST_CASE("cli scatter emits a two-column table") {
  const auto result =
      run_cli("scatter --pair q-xi --n 25 --reps 120 --seed 8 --format csv");
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.rfind("quadrant,xi\n", 0) == 0);
  std::size_t lines = 0;
  for (const char c : result.output) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 121);
}

TEST_CASE("cli writes json output to a file") {
  const TempFile csv(bivariate_csv(30, 5));
  const std::string out_path =
      (std::filesystem::temp_directory_path() / "rcor_out_test.json").string();
  const auto result = run_cli("test --input " + csv.path() +
                              " --method cs --seed 2 --output " + out_path);
  REQUIRE(result.exit_code == 0);
  const auto j = nlohmann::json::parse(read_text_file(out_path));
  CHECK(j.at("method") == "cs");
  std::filesystem::remove(out_path);
}
