#include "rcor/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rcor/error.hpp"

namespace rcor {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xef\xbb\xbf") text.remove_prefix(3);

  CsvTable table;
  std::size_t line_no = 0;
  bool saw_first = false;
  std::size_t width = 0;

  while (!text.empty()) {
    std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (trim(line).empty()) continue;

    const auto cells = split_line(line);
    if (!saw_first) {
      saw_first = true;
      width = cells.size();
      table.columns.resize(width);
      bool all_numeric = true;
      std::vector<double> values(width);
      for (std::size_t c = 0; c < width; ++c) {
        if (!parse_double(cells[c], values[c])) {
          all_numeric = false;
          break;
        }
      }
      if (all_numeric) {
        for (std::size_t c = 0; c < width; ++c) table.columns[c].push_back(values[c]);
      } else {
        table.names.reserve(width);
        for (const auto cell : cells) table.names.emplace_back(trim(cell));
      }
      continue;
    }

    if (cells.size() != width) {
      throw parse_error("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " cells, got " +
                        std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      double value = 0.0;
      if (!parse_double(cells[c], value)) {
        throw parse_error("line " + std::to_string(line_no) + ", column " +
                          std::to_string(c + 1) + ": non-numeric cell '" +
                          std::string(trim(cells[c])) + "'");
      }
      table.columns[c].push_back(value);
    }
  }

  if (!saw_first) throw parse_error("input contains no CSV content");
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw io_error("failed while reading: " + path);
  return std::move(buffer).str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw io_error("failed while writing: " + path);
}

CsvTable read_csv_file(const std::string& path) {
  return parse_csv(read_text_file(path));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  for (const auto cell : split_line(text)) {
    const auto token = trim(cell);
    if (token.empty()) {
      throw std::invalid_argument("empty entry in list '" + std::string(text) + "'");
    }
    out.emplace_back(token);
  }
  return out;
}

std::vector<std::size_t> resolve_columns(const CsvTable& table,
                                         std::span<const std::string> selectors) {
  std::vector<std::size_t> out;
  out.reserve(selectors.size());
  for (const auto& sel : selectors) {
    std::size_t index = 0;
    const char* first = sel.data();
    const char* last = sel.data() + sel.size();
    const auto [ptr, ec] = std::from_chars(first, last, index);
    if (ec == std::errc{} && ptr == last) {
      if (index >= table.cols()) {
        throw std::invalid_argument("column index " + sel + " out of range (" +
                                    std::to_string(table.cols()) + " columns)");
      }
      out.push_back(index);
      continue;
    }
    bool found = false;
    for (std::size_t c = 0; c < table.names.size(); ++c) {
      if (table.names[c] == sel) {
        out.push_back(c);
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::invalid_argument(
          table.names.empty()
              ? "column '" + sel + "' needs a header line to resolve by name"
              : "unknown column name '" + sel + "'");
    }
  }
  return out;
}

std::string format_double(double value) {
  char buffer[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    double back = 0.0;
    if (parse_double(buffer, back) && back == value) break;
  }
  std::string shortest = buffer;
  if (value == std::floor(value) && std::abs(value) < 1e17) {
    std::snprintf(buffer, sizeof(buffer), "%.0f", value);
    double back = 0.0;
    if (parse_double(buffer, back) && back == value &&
        std::strlen(buffer) <= shortest.size()) {
      shortest = buffer;
    }
  }
  return shortest;
}

namespace {

constexpr int kSchemaVersion = 1;

void require_schema(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("schema_version") ||
      j["schema_version"] != kSchemaVersion) {
    throw parse_error("unsupported or missing schema_version");
  }
}

}  // namespace

nlohmann::json to_json(const TestOutcome& outcome) {
  nlohmann::json j{
      {"schema_version", kSchemaVersion},
      {"method", outcome.method},
      {"statistic", outcome.statistic},
      {"p_value", outcome.p_value},
      {"p_source", to_string(outcome.p_source)},
      {"n", outcome.n},
  };
  j["components"] = nlohmann::json::object();
  for (const auto& [name, value] : outcome.components) {
    j["components"][name] = value;
  }
  if (outcome.mode.has_value()) j["mode"] = *outcome.mode;
  if (outcome.seed.has_value()) j["seed"] = *outcome.seed;
  if (outcome.permutations.has_value()) j["permutations"] = *outcome.permutations;
  if (outcome.degenerate_replicates.has_value()) {
    j["degenerate_replicates"] = *outcome.degenerate_replicates;
  }
  if (outcome.null_sd.has_value()) j["null_sd"] = *outcome.null_sd;
  return j;
}

TestOutcome test_outcome_from_json(const nlohmann::json& j) {
  require_schema(j);
  TestOutcome out;
  out.method = j.at("method").get<std::string>();
  out.statistic = j.at("statistic").get<double>();
  out.p_value = j.at("p_value").get<double>();
  const auto source = j.at("p_source").get<std::string>();
  if (source == "analytic") {
    out.p_source = PValueSource::analytic;
  } else if (source == "permutation") {
    out.p_source = PValueSource::permutation;
  } else {
    throw parse_error("unknown p_source '" + source + "'");
  }
  out.n = j.at("n").get<std::int64_t>();
  for (const auto& [name, value] : j.at("components").items()) {
    out.components[name] = value.get<double>();
  }
  if (j.contains("mode")) out.mode = j["mode"].get<std::string>();
  if (j.contains("seed")) out.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("permutations")) {
    out.permutations = j["permutations"].get<std::int64_t>();
  }
  if (j.contains("degenerate_replicates")) {
    out.degenerate_replicates = j["degenerate_replicates"].get<std::int64_t>();
  }
  if (j.contains("null_sd")) out.null_sd = j["null_sd"].get<double>();
  return out;
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j{
      {"schema_version", kSchemaVersion},
      {"scenario", report.scenario},
      {"n", report.n},
      {"reps", report.reps},
      {"alpha", report.alpha},
      {"seed", report.seed},
  };
  if (report.permutations.has_value()) j["permutations"] = *report.permutations;
  j["rates"] = nlohmann::json::array();
  for (const auto& r : report.rates) {
    j["rates"].push_back({{"test", r.test},
                          {"rejections", r.rejections},
                          {"reps", r.reps},
                          {"rate", r.rate},
                          {"mc_se", r.mc_se}});
  }
  return j;
}

ExperimentReport experiment_report_from_json(const nlohmann::json& j) {
  require_schema(j);
  ExperimentReport report;
  report.scenario = j.at("scenario").get<std::string>();
  report.n = j.at("n").get<std::int64_t>();
  report.reps = j.at("reps").get<std::int64_t>();
  report.alpha = j.at("alpha").get<double>();
  report.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("permutations")) {
    report.permutations = j["permutations"].get<std::int64_t>();
  }
  for (const auto& r : j.at("rates")) {
    RejectionRate rate;
    rate.test = r.at("test").get<std::string>();
    rate.rejections = r.at("rejections").get<std::int64_t>();
    rate.reps = r.at("reps").get<std::int64_t>();
    rate.rate = r.at("rate").get<double>();
    rate.mc_se = r.at("mc_se").get<double>();
    report.rates.push_back(std::move(rate));
  }
  return report;
}

nlohmann::json to_json(const ScatterTable& table) {
  nlohmann::json j{
      {"schema_version", kSchemaVersion},
      {"pair", table.pair},
      {"first", table.first},
      {"second", table.second},
      {"n", table.n},
      {"seed", table.seed},
  };
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    j["rows"].push_back({row[0], row[1]});
  }
  return j;
}

std::string to_csv(const TestOutcome& outcome) {
  std::string out = "field,value\n";
  out += "method," + outcome.method + "\n";
  out += "statistic," + format_double(outcome.statistic) + "\n";
  out += "p_value," + format_double(outcome.p_value) + "\n";
  out += std::string("p_source,") + to_string(outcome.p_source) + "\n";
  out += "n," + std::to_string(outcome.n) + "\n";
  if (outcome.mode.has_value()) out += "mode," + *outcome.mode + "\n";
  if (outcome.seed.has_value()) {
    out += "seed," + std::to_string(*outcome.seed) + "\n";
  }
  if (outcome.permutations.has_value()) {
    out += "permutations," + std::to_string(*outcome.permutations) + "\n";
  }
  if (outcome.degenerate_replicates.has_value()) {
    out += "degenerate_replicates," +
           std::to_string(*outcome.degenerate_replicates) + "\n";
  }
  if (outcome.null_sd.has_value()) {
    out += "null_sd," + format_double(*outcome.null_sd) + "\n";
  }
  for (const auto& [name, value] : outcome.components) {
    out += "component." + name + "," + format_double(value) + "\n";
  }
  return out;
}

std::string to_csv(const ExperimentReport& report) {
  std::string out =
      "scenario,n,reps,alpha,seed,permutations,test,rejections,rate,mc_se\n";
  const std::string meta =
      report.scenario + "," + std::to_string(report.n) + "," +
      std::to_string(report.reps) + "," + format_double(report.alpha) + "," +
      std::to_string(report.seed) + "," +
      (report.permutations.has_value() ? std::to_string(*report.permutations)
                                       : std::string()) +
      ",";
  for (const auto& r : report.rates) {
    out += meta + r.test + "," + std::to_string(r.rejections) + "," +
           format_double(r.rate) + "," + format_double(r.mc_se) + "\n";
  }
  return out;
}

std::string to_csv(const ScatterTable& table) {
  std::string out = table.first + "," + table.second + "\n";
  for (const auto& row : table.rows) {
    out += format_double(row[0]) + "," + format_double(row[1]) + "\n";
  }
  return out;
}

}  // namespace rcor
