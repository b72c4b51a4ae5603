#include "webextractor/kg/graph.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "webextractor/error.hpp"
#include "webextractor/util/url.hpp"

namespace wex::kg {

namespace {

const PropertyId& formatter_url_property() {
  static const PropertyId p("P1630");
  return p;
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const KgSource> source, KgOptions options)
    : source_(std::move(source)), options_(std::move(options)) {
  require(source_ != nullptr, ErrorCode::config, "knowledge graph needs a source");
  require(!options_.languages.empty(), ErrorCode::config, "at least one label language required");
}

EntityRecord KnowledgeGraph::entity(const EntityId& id) const {
  auto rec = source_->find_entity(id);
  if (!rec) fail(ErrorCode::not_found, "unknown entity " + id.str());
  return std::move(*rec);
}

PropertyInfo KnowledgeGraph::property(const PropertyId& id) const {
  const auto rec = source_->find_property_record(id);
  if (!rec) fail(ErrorCode::not_found, "unknown property " + id.str());
  PropertyInfo info;
  info.id = id;
  info.datatype = rec->datatype;
  for (const auto& lang : options_.languages) {
    if (const auto l = rec->labels.find(lang); l != rec->labels.end() && !l->second.empty()) {
      info.labels.push_back(l->second);
    }
    if (const auto a = rec->aliases.find(lang); a != rec->aliases.end()) {
      for (const auto& alias : a->second) {
        if (!alias.empty()) info.aliases.push_back(alias);
      }
    }
  }
  require(!info.labels.empty(), ErrorCode::invalid, "property " + id.str() + " has no label");
  return info;
}

ExternalIdentifier KnowledgeGraph::external_identifier(const PropertyId& id) const {
  const auto rec = source_->find_property_record(id);
  if (!rec) fail(ErrorCode::not_found, "unknown property " + id.str());
  const auto it = rec->claims.find(formatter_url_property());
  require(it != rec->claims.end() && !it->second.empty(), ErrorCode::config,
          id.str() + " has no formatter URL (P1630)");
  return ExternalIdentifier::make(id, it->second.front().value);
}

std::set<std::string> KnowledgeGraph::fetch_labels_aliases(const EntityId& id) const {
  const EntityRecord rec = entity(id);
  std::set<std::string> names;
  for (const auto& lang : options_.languages) {
    if (const auto l = rec.labels.find(lang); l != rec.labels.end() && !l->second.empty()) names.insert(l->second);
    if (const auto a = rec.aliases.find(lang); a != rec.aliases.end()) {
      for (const auto& alias : a->second) {
        if (!alias.empty()) names.insert(alias);
      }
    }
  }
  return names;
}

std::set<EntityId> KnowledgeGraph::fetch_outgoing_neighbors(const EntityId& id) const {
  const EntityRecord rec = entity(id);
  std::set<EntityId> out;
  for (const auto& [pid, values] : rec.claims) {
    for (const auto& v : values) {
      if (v.is_item()) out.insert(v.as_item());
    }
  }
  return out;
}

std::set<std::string> KnowledgeGraph::object_names(const ClaimValue& object) const {
  if (object.is_item()) return fetch_labels_aliases(object.as_item());
  return {object.value};
}

std::vector<EntityId> KnowledgeGraph::entities_named(std::string_view surface) const {
  return source_->entities_named(surface, options_.languages);
}

std::string resolve_formatter_url(const ExternalIdentifier& x, std::string_view id_value) {
  require(!id_value.empty(), ErrorCode::precondition, "empty identifier value for " + x.property.str());
  const auto pos = x.formatter_template.find("$1");
  require(pos != std::string::npos, ErrorCode::config, "formatter URL has no $1: " + x.formatter_template);
  std::string url = x.formatter_template;
  url.replace(pos, 2, url_escape(id_value));
  return url;
}

std::vector<EntityRecord> sample_entities_with_identifier(const KnowledgeGraph& kg, const ExternalIdentifier& x,
                                                          std::size_t n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::precondition, "sample size must be at least 1");
  std::vector<EntityId> ids = kg.source().entities_with_external_id(x.property);
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  if (ids.size() > n) ids.resize(n);
  std::sort(ids.begin(), ids.end());
  std::vector<EntityRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(kg.entity(id));
  return out;
}

std::vector<PropertyUsage> rank_properties(const std::vector<EntityRecord>& entities, SortOrder order) {
  require(!entities.empty(), ErrorCode::precondition, "rank_properties needs at least one entity");
  std::map<PropertyId, std::size_t> counts;
  for (const auto& e : entities) {
    for (const auto& [pid, values] : e.claims) {
      if (!values.empty()) ++counts[pid];
    }
  }
  std::vector<PropertyUsage> out;
  for (const auto& [pid, c] : counts) out.push_back({pid, c});
  std::stable_sort(out.begin(), out.end(), [order](const PropertyUsage& a, const PropertyUsage& b) {
    if (a.usage_count != b.usage_count) {
      return order == SortOrder::descending ? a.usage_count > b.usage_count : a.usage_count < b.usage_count;
    }
    return a.property < b.property;
  });
  return out;
}

std::vector<EntityRecord> find_incomplete(const ExternalIdentifier& x, const PropertyId& p,
                                          const std::vector<EntityRecord>& entities) {
  std::vector<EntityRecord> out;
  for (const auto& e : entities) {
    if (e.external_ids.count(x.property) && !e.has_claim(p)) out.push_back(e);
  }
  return out;
}

}  // namespace wex::kg
