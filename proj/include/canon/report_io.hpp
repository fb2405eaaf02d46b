#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "canon/conditioning.hpp"
#include "canon/experiments.hpp"
#include "canon/ldp.hpp"

namespace canon {

// One double as a json value: finite numbers stay numbers, non-finite values
// map to the documented strings "Infinity", "-Infinity", "NaN".
nlohmann::json json_number(double v);

// 17 significant digits, the round-trip-safe CSV float format.
std::string csv_float(double v);

// Pretty-printed, sorted keys, trailing newline; byte-stable across runs.
std::string render_json(const nlohmann::json& j);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// "# key=value" preamble lines, then the header row, then data rows.
// UTF-8, LF line endings, trailing newline.
std::string render_csv(
    const std::vector<std::pair<std::string, std::string>>& preamble,
    const CsvTable& table);

// Flattens a json object into sorted key=value preamble pairs; nested values
// are embedded as compact json.
std::vector<std::pair<std::string, std::string>> preamble_of(
    const nlohmann::json& config);

// Creates or truncates path. IoError carries the path.
void write_text(const std::string& path, const std::string& text);

nlohmann::json to_json(const ConditionalLaw& law);
CsvTable csv_table(const ConditionalLaw& law);

nlohmann::json to_json(const ConvergenceReport& rep);
CsvTable csv_table(const ConvergenceReport& rep);
// verdict/fit/summary lines for the CSV preamble.
std::vector<std::pair<std::string, std::string>> report_preamble(
    const ConvergenceReport& rep);

// Sampled rate function for reporting.
struct RateTable {
  std::vector<double> y, phi, dphi, d2phi;
  double mean = 0.0, variance = 0.0;
  std::pair<double, double> domain{0.0, 0.0};
};
RateTable tabulate(const RateFunction& rf, double y_lo, double y_hi,
                   int points);
nlohmann::json to_json(const RateTable& t);
CsvTable csv_table(const RateTable& t);

}  // namespace canon
