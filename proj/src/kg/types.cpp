#include "webextractor/kg/types.hpp"

#include <algorithm>
#include <cctype>

#include "webextractor/error.hpp"

namespace wex::kg {

namespace {

bool letter_digits(std::string_view s) {
  if (s.size() < 2 || !std::isupper(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

EntityId::EntityId(std::string value) : value_(std::move(value)) {
  require(is_valid(value_), ErrorCode::invalid, "malformed entity id: '" + value_ + "'");
}

bool EntityId::is_valid(std::string_view s) { return letter_digits(s); }

PropertyId::PropertyId(std::string value) : value_(std::move(value)) {
  require(value_.size() >= 2 && value_.front() == 'P' && letter_digits(value_), ErrorCode::invalid,
          "malformed property id: '" + value_ + "'");
}

ExternalIdentifier ExternalIdentifier::make(PropertyId property, std::string formatter_template) {
  const auto first = formatter_template.find("$1");
  require(first != std::string::npos, ErrorCode::config,
          "formatter URL for " + property.str() + " has no $1 placeholder: " + formatter_template);
  require(formatter_template.find("$1", first + 2) == std::string::npos, ErrorCode::config,
          "formatter URL for " + property.str() + " has more than one $1: " + formatter_template);
  return ExternalIdentifier{std::move(property), std::move(formatter_template)};
}

bool EntityRecord::has_claim(const PropertyId& p) const {
  const auto it = claims.find(p);
  return it != claims.end() && !it->second.empty();
}

nlohmann::json to_json(const ClaimValue& v) {
  return v.is_item() ? nlohmann::json{{"item", v.value}} : nlohmann::json{{"value", v.value}};
}

ClaimValue claim_value_from_json(const nlohmann::json& j) {
  if (j.contains("item")) return ClaimValue::item(EntityId(j.at("item").get<std::string>()));
  require(j.contains("value"), ErrorCode::invalid, "claim value needs 'item' or 'value': " + j.dump());
  return ClaimValue::literal(j.at("value").get<std::string>());
}

nlohmann::json to_json(const Triple& t) {
  return {{"subject", t.subject.str()}, {"property", t.property.str()}, {"object", to_json(t.object)}};
}

Triple triple_from_json(const nlohmann::json& j) {
  return Triple{EntityId(j.at("subject").get<std::string>()), PropertyId(j.at("property").get<std::string>()),
                claim_value_from_json(j.at("object"))};
}

}  // namespace wex::kg
