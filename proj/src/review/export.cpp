#include "webextractor/review/export.hpp"

#include <regex>

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/text.hpp"

namespace wex::review {

using nlohmann::json;

ExportFormat parse_export_format(std::string_view s) {
  if (s == "json") return ExportFormat::json;
  if (s == "quickstatements" || s == "qs") return ExportFormat::quickstatements;
  fail(ErrorCode::invalid, "unknown export format '" + std::string(s) + "' (json or quickstatements)");
}

json export_json(const std::vector<FactProposal>& proposals) {
  json statements = json::array();
  for (const auto& p : proposals) {
    if (p.status != Status::approved) continue;
    statements.push_back({{"subject", p.subject.str()},
                          {"property", p.property.str()},
                          {"object", {{"kind", object_kind_name(p.object.kind)}, {"value", p.object.value}}},
                          {"reference",
                           {{"url", p.evidence.source_url},
                            {"retrieved", p.evidence.retrieved_at},
                            {"snapshot_hash", p.evidence.snapshot_hash}}},
                          {"proposal_id", p.id},
                          {"reviewer", p.reviewer.value_or("")}});
  }
  return {{"format", "webextractor-statements"}, {"version", 1}, {"statements", std::move(statements)}};
}

std::string quickstatements_literal(std::string_view value_in) {
  static const std::regex year(R"(^(\d{4})$)");
  static const std::regex day(R"(^(\d{4})-(\d{2})-(\d{2})$)");
  static const std::regex number(R"(^[+-]?\d+(\.\d+)?$)");
  const std::string value = text::trim(value_in);
  std::smatch m;
  if (std::regex_match(value, m, year)) return "+" + m[1].str() + "-00-00T00:00:00Z/9";
  if (std::regex_match(value, m, day)) return "+" + value + "T00:00:00Z/11";
  if (std::regex_match(value, number)) return value;
  // The format has no escape for double quotes.
  std::string quoted = "\"";
  for (char c : value) quoted.push_back(c == '"' ? '\'' : (c == '\t' || c == '\n' ? ' ' : c));
  return quoted + "\"";
}

namespace {

std::string retrieved_day(const std::string& retrieved_at) {
  if (retrieved_at.size() < 10) return {};
  return "+" + retrieved_at.substr(0, 10) + "T00:00:00Z/11";
}

}  // namespace

std::string export_quickstatements(const std::vector<FactProposal>& proposals) {
  std::string body;
  std::size_t count = 0;
  for (const auto& p : proposals) {
    if (p.status != Status::approved) continue;
    const std::string object =
        p.object.kind == ProposalObject::Kind::item ? p.object.value : quickstatements_literal(p.object.value);
    std::string line = p.subject.str() + "\t" + p.property.str() + "\t" + object + "\tS854\t\"" +
                       p.evidence.source_url + "\"";
    if (const std::string day = retrieved_day(p.evidence.retrieved_at); !day.empty()) line += "\tS813\t" + day;
    body += line + "\n";
    ++count;
  }
  return "# webextractor approved statements: " + std::to_string(count) + "\n" + body;
}

}  // namespace wex::review
