#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "webextractor/kg/source.hpp"
#include "webextractor/kg/types.hpp"

namespace wex::kg {

struct KgOptions {
  std::vector<std::string> languages{"en"};
};

// Typed read access over a KgSource. Immutable; safe for concurrent reads.
class KnowledgeGraph {
 public:
  KnowledgeGraph(std::shared_ptr<const KgSource> source, KgOptions options = {});

  // not-found error for unknown ids
  EntityRecord entity(const EntityId& id) const;
  PropertyInfo property(const PropertyId& id) const;
  ExternalIdentifier external_identifier(const PropertyId& id) const;

  // Union of labels and aliases in the configured languages.
  std::set<std::string> fetch_labels_aliases(const EntityId& id) const;

  // Item objects over all claims of the entity; literals excluded.
  std::set<EntityId> fetch_outgoing_neighbors(const EntityId& id) const;

  // Names of a claim object: labels/aliases for items, the string for literals.
  std::set<std::string> object_names(const ClaimValue& object) const;

  std::vector<EntityId> entities_named(std::string_view surface) const;

  const KgSource& source() const { return *source_; }
  const KgOptions& options() const { return options_; }

 private:
  std::shared_ptr<const KgSource> source_;
  KgOptions options_;
};

// ---- knowledge selection ----

// Template with "$1" replaced by the percent-encoded id value.
std::string resolve_formatter_url(const ExternalIdentifier& x, std::string_view id_value);

std::vector<EntityRecord> sample_entities_with_identifier(const KnowledgeGraph& kg,
                                                          const ExternalIdentifier& x,
                                                          std::size_t n, std::uint64_t seed);

enum class SortOrder { descending, ascending };

struct PropertyUsage {
  PropertyId property;
  std::size_t usage_count = 0;

  friend bool operator==(const PropertyUsage&, const PropertyUsage&) = default;
};

// usage_count = number of entities with at least one claim for the property.
// Ties are broken by property id, lexicographically.
std::vector<PropertyUsage> rank_properties(const std::vector<EntityRecord>& entities,
                                           SortOrder order = SortOrder::descending);

// Entities that carry x but have no claim for p.
std::vector<EntityRecord> find_incomplete(const ExternalIdentifier& x, const PropertyId& p,
                                          const std::vector<EntityRecord>& entities);

}  // namespace wex::kg
