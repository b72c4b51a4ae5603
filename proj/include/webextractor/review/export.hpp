#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "webextractor/review/proposal.hpp"

namespace wex::review {

enum class ExportFormat { json, quickstatements };

ExportFormat parse_export_format(std::string_view s);  // invalid error otherwise

// {"format":"webextractor-statements","version":1,"statements":[...]}.
// Only approved proposals are written; anything else is skipped.
nlohmann::json export_json(const std::vector<FactProposal>& proposals);

// QuickStatements v1: one tab-separated line per statement with the source
// url as S854 and the retrieval day as S813, after a "#" header line.
std::string export_quickstatements(const std::vector<FactProposal>& proposals);

// Value column for a literal: a bare 4-digit year or YYYY-MM-DD becomes a
// time value, a plain number stays as is, anything else is quoted.
std::string quickstatements_literal(std::string_view value);

}  // namespace wex::review
