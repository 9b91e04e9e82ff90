#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "aceei/economy.hpp"
#include "aceei/market.hpp"

namespace aceei {

using Json = nlohmann::ordered_json;

/// Malformed or schema-violating input document.
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Economy: {"courses":[{"id","capacity"}],"students":[{"id","preferences":[["c",...],...]}]}
Json economy_to_json(const Economy& economy);
Economy economy_from_json(const Json& doc);

// Solution: {"prices":{id:"n/d"},"budgets":{id:"n/d"},"allocation":{student:[course ids]}}
Json solution_to_json(const Economy& economy, const Solution& solution);
Solution solution_from_json(const Economy& economy, const Json& doc);

// Report: {"z":[...],"alpha_sq":"n/d","conditions":[c1,c2,c3]} plus diagnostics.
Json report_to_json(const Economy& economy, const ClearingReport& report, bool float_view = false);

Json rational_to_json(const Rational& value);
Rational rational_from_json(const Json& value);

/// Reads and parses a JSON file; throws FormatError on I/O or syntax errors.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

}  // namespace aceei
