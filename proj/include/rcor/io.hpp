#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rcor/combined.hpp"
#include "rcor/montecarlo.hpp"

namespace rcor {

// Numeric table read from CSV. `names` is empty when the file had no header
// line; otherwise names.size() == columns.size().
struct CsvTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t cols() const { return columns.size(); }
  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
};

// Parses comma-separated numeric text. A UTF-8 BOM is stripped; the first
// non-blank line is a header iff any of its cells does not parse as a
// number; blank lines are skipped. Ragged rows or non-numeric cells raise
// parse_error naming the 1-based line and column.
CsvTable parse_csv(std::string_view text);

// parse_csv over the file's bytes; an unreadable path raises io_error.
CsvTable read_csv_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// Splits "a,b,c" into trimmed nonempty tokens; empty tokens are
// invalid_argument.
std::vector<std::string> split_list(std::string_view text);

// Column selectors are names (when the table has a header) or 0-based
// indices; unknown names and out-of-range indices raise invalid_argument.
std::vector<std::size_t> resolve_columns(const CsvTable& table,
                                         std::span<const std::string> selectors);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// JSON forms carry schema_version = 1; TestOutcome round-trips losslessly.
nlohmann::json to_json(const TestOutcome& outcome);
TestOutcome test_outcome_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport experiment_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScatterTable& table);

// CSV forms. TestOutcome emits field,value rows; ExperimentReport one row
// per test with the run metadata repeated; ScatterTable a two-column table.
std::string to_csv(const TestOutcome& outcome);
std::string to_csv(const ExperimentReport& report);
std::string to_csv(const ScatterTable& table);

}  // namespace rcor
