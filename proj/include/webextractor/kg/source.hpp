#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "webextractor/kg/types.hpp"

namespace wex::kg {

// Read-only backing store for the knowledge graph.
class KgSource {
 public:
  virtual ~KgSource() = default;

  virtual std::optional<EntityRecord> find_entity(const EntityId& id) const = 0;

  // Property records carry labels, aliases, datatype and (for external
  // identifiers) the formatter URL claim.
  virtual std::optional<EntityRecord> find_property_record(const PropertyId& id) const = 0;

  // Sorted by id.
  virtual std::vector<EntityId> entities_with_external_id(const PropertyId& x) const = 0;

  // Entities with a label or alias whose normalize_name() equals
  // normalize_name(surface), restricted to `languages`. Sorted by id.
  virtual std::vector<EntityId> entities_named(std::string_view surface,
                                               const std::vector<std::string>& languages) const = 0;

  // All (subject, object) pairs of claims for property p, sorted.
  virtual std::vector<std::pair<EntityId, ClaimValue>> claims_of_property(const PropertyId& p) const = 0;
};

// Newline-delimited JSON records: one entity or property per line.
//   {"id": "Q994013", "labels": {"en": "..."}, "aliases": {"en": [...]},
//    "claims": {"P108": [{"item": "Q31519"}, {"value": "1997"}]},
//    "external_ids": {"P496": "0000-0002-0977-8922"}}
// Property lines additionally carry "datatype"; external-identifier
// properties hold their formatter URL as a P1630 literal claim.
class FixtureSource final : public KgSource {
 public:
  static std::shared_ptr<FixtureSource> load(const std::filesystem::path& path);
  static std::shared_ptr<FixtureSource> from_lines(const std::vector<std::string>& lines);

  std::optional<EntityRecord> find_entity(const EntityId& id) const override;
  std::optional<EntityRecord> find_property_record(const PropertyId& id) const override;
  std::vector<EntityId> entities_with_external_id(const PropertyId& x) const override;
  std::vector<EntityId> entities_named(std::string_view surface,
                                       const std::vector<std::string>& languages) const override;
  std::vector<std::pair<EntityId, ClaimValue>> claims_of_property(const PropertyId& p) const override;

  std::size_t entity_count() const { return entities_.size(); }

 private:
  FixtureSource() = default;
  void add_line(const std::string& line, std::size_t line_no);
  void finish();

  std::map<EntityId, EntityRecord> entities_;
  std::map<PropertyId, EntityRecord> properties_;
  // normalized name -> language -> ids
  std::unordered_map<std::string, std::map<std::string, std::set<EntityId>>> name_index_;
};

struct EndpointOptions {
  std::string sparql_url = "https://query.wikidata.org/sparql";
  std::string entity_data_url = "https://www.wikidata.org/wiki/Special:EntityData/$1.json";
  std::chrono::milliseconds timeout{30000};
  std::string user_agent = "webextractor/0.1";
  std::size_t query_limit = 10000;
};

// Live client: SPARQL for set queries, the entity-data REST route for records.
// Responses are cached in memory; cache writes are serialized.
class EndpointSource final : public KgSource {
 public:
  explicit EndpointSource(EndpointOptions options);

  std::optional<EntityRecord> find_entity(const EntityId& id) const override;
  std::optional<EntityRecord> find_property_record(const PropertyId& id) const override;
  std::vector<EntityId> entities_with_external_id(const PropertyId& x) const override;
  std::vector<EntityId> entities_named(std::string_view surface,
                                       const std::vector<std::string>& languages) const override;
  std::vector<std::pair<EntityId, ClaimValue>> claims_of_property(const PropertyId& p) const override;

  // Parses one entity object of the entity-data JSON shape.
  static EntityRecord parse_entity_json(const nlohmann::json& entity);

 private:
  // Returns nullopt on 404; throws transport error otherwise.
  std::optional<std::string> get(const std::string& url) const;
  nlohmann::json sparql(const std::string& query) const;
  std::optional<EntityRecord> fetch_record(const std::string& id) const;

  EndpointOptions options_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, std::optional<std::string>> cache_;
};

}  // namespace wex::kg
