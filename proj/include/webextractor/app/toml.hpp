#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

namespace wex::app {

// Reads the TOML subset used by config files into a JSON object: [table] and
// [dotted.table] headers, bare or quoted keys, basic and literal strings,
// integers, floats, booleans and (multi-line) arrays. Inline tables, dates
// and array-of-tables are rejected. Config error with the line number on
// anything it cannot read.
nlohmann::json parse_toml(std::string_view text);

}  // namespace wex::app
