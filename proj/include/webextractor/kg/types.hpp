#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wex::kg {

// Item identifier such as "Q994013". Letter prefix followed by digits.
class EntityId {
 public:
  EntityId() = default;
  explicit EntityId(std::string value);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  static bool is_valid(std::string_view s);

  friend auto operator<=>(const EntityId&, const EntityId&) = default;

 private:
  std::string value_;
};

// Property identifier such as "P108".
class PropertyId {
 public:
  PropertyId() = default;
  explicit PropertyId(std::string value);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const PropertyId&, const PropertyId&) = default;

 private:
  std::string value_;
};

struct PropertyInfo {
  PropertyId id;
  std::vector<std::string> labels;
  std::vector<std::string> aliases;
  std::string datatype;  // "wikibase-item", "external-id", "time", "string", ...

  bool is_item_valued() const { return datatype == "wikibase-item"; }
  bool is_external_id() const { return datatype == "external-id"; }
};

struct ExternalIdentifier {
  PropertyId property;
  std::string formatter_template;  // exactly one "$1"

  // Throws config error when the template does not contain exactly one "$1".
  static ExternalIdentifier make(PropertyId property, std::string formatter_template);
};

// Object of a claim: an item reference or a literal in its string form.
struct ClaimValue {
  enum class Kind { item, literal };

  Kind kind = Kind::literal;
  std::string value;

  static ClaimValue item(const EntityId& id) { return {Kind::item, id.str()}; }
  static ClaimValue literal(std::string v) { return {Kind::literal, std::move(v)}; }

  bool is_item() const noexcept { return kind == Kind::item; }
  EntityId as_item() const { return EntityId(value); }

  friend auto operator<=>(const ClaimValue&, const ClaimValue&) = default;
};

struct Triple {
  EntityId subject;
  PropertyId property;
  ClaimValue object;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct EntityRecord {
  EntityId id;
  std::map<std::string, std::string> labels;                // language -> label
  std::map<std::string, std::vector<std::string>> aliases;  // language -> aliases
  std::map<PropertyId, std::vector<ClaimValue>> claims;
  std::map<PropertyId, std::string> external_ids;
  std::string datatype;  // property records only

  bool has_claim(const PropertyId& p) const;
};

// Fixture-line JSON forms.
nlohmann::json to_json(const ClaimValue& v);
ClaimValue claim_value_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Triple& t);
Triple triple_from_json(const nlohmann::json& j);

}  // namespace wex::kg
