#include <algorithm>
#include <set>

#include "httplib.h"
#include "webextractor/error.hpp"
#include "webextractor/kg/source.hpp"
#include "webextractor/util/text.hpp"
#include "webextractor/util/url.hpp"

namespace wex::kg {

namespace {

constexpr std::string_view kEntityPrefix = "http://www.wikidata.org/entity/";

std::string sparql_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::optional<std::string> entity_from_uri(const std::string& uri) {
  if (uri.rfind(kEntityPrefix, 0) != 0) return std::nullopt;
  auto id = uri.substr(kEntityPrefix.size());
  if (!EntityId::is_valid(id)) return std::nullopt;
  return id;
}

std::optional<ClaimValue> snak_value(const nlohmann::json& snak) {
  if (snak.value("snaktype", "value") != "value" || !snak.contains("datavalue")) return std::nullopt;
  const auto& dv = snak.at("datavalue");
  const auto type = dv.value("type", "");
  const auto& v = dv.at("value");
  if (type == "wikibase-entityid") return ClaimValue::item(EntityId(v.at("id").get<std::string>()));
  if (type == "string") return ClaimValue::literal(v.get<std::string>());
  if (type == "time") return ClaimValue::literal(v.at("time").get<std::string>());
  if (type == "monolingualtext") return ClaimValue::literal(v.at("text").get<std::string>());
  if (type == "quantity") return ClaimValue::literal(v.at("amount").get<std::string>());
  return std::nullopt;
}

}  // namespace

EndpointSource::EndpointSource(EndpointOptions options) : options_(std::move(options)) {}

std::optional<std::string> EndpointSource::get(const std::string& url) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = cache_.find(url); it != cache_.end()) return it->second;
  }
  const Url parsed = Url::parse(url);
  httplib::Client client(parsed.origin());
  const auto secs = options_.timeout.count() / 1000;
  const auto usecs = (options_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_follow_location(true);
  const httplib::Headers headers{{"User-Agent", options_.user_agent}, {"Accept", "application/json"}};
  auto res = client.Get(parsed.path_and_query, headers);
  if (!res) fail(ErrorCode::transport, "KG endpoint unreachable: " + url + " (" + httplib::to_string(res.error()) + ")");
  std::optional<std::string> body;
  if (res->status == 200) {
    body = res->body;
  } else if (res->status != 404) {
    fail(ErrorCode::transport, "KG endpoint " + url + " returned HTTP " + std::to_string(res->status));
  }
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(url, body);
  return body;
}

nlohmann::json EndpointSource::sparql(const std::string& query) const {
  const auto body = get(options_.sparql_url + "?format=json&query=" + url_escape(query));
  if (!body) fail(ErrorCode::transport, "SPARQL endpoint returned 404");
  try {
    return nlohmann::json::parse(*body);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::protocol, std::string("malformed SPARQL response: ") + e.what());
  }
}

EntityRecord EndpointSource::parse_entity_json(const nlohmann::json& e) {
  EntityRecord rec;
  rec.id = EntityId(e.at("id").get<std::string>());
  rec.datatype = e.value("datatype", "");
  if (e.contains("labels")) {
    for (const auto& [lang, v] : e.at("labels").items()) rec.labels[lang] = v.at("value").get<std::string>();
  }
  if (e.contains("aliases")) {
    for (const auto& [lang, list] : e.at("aliases").items()) {
      for (const auto& v : list) rec.aliases[lang].push_back(v.at("value").get<std::string>());
    }
  }
  if (e.contains("claims")) {
    for (const auto& [pid, statements] : e.at("claims").items()) {
      for (const auto& st : statements) {
        const auto& snak = st.at("mainsnak");
        if (snak.value("datatype", "") == "external-id") {
          if (const auto v = snak_value(snak)) rec.external_ids.emplace(PropertyId(pid), v->value);
          continue;
        }
        if (const auto v = snak_value(snak)) rec.claims[PropertyId(pid)].push_back(*v);
      }
    }
  }
  return rec;
}

std::optional<EntityRecord> EndpointSource::fetch_record(const std::string& id) const {
  std::string url = options_.entity_data_url;
  url.replace(url.find("$1"), 2, url_escape(id));
  const auto body = get(url);
  if (!body) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(*body);
    const auto& entities = j.at("entities");
    // Redirected items come back under their target id.
    if (entities.contains(id)) return parse_entity_json(entities.at(id));
    if (!entities.empty()) return parse_entity_json(entities.begin().value());
    return std::nullopt;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::protocol, "malformed entity data for " + id + ": " + e.what());
  }
}

std::optional<EntityRecord> EndpointSource::find_entity(const EntityId& id) const { return fetch_record(id.str()); }

std::optional<EntityRecord> EndpointSource::find_property_record(const PropertyId& id) const {
  return fetch_record(id.str());
}

std::vector<EntityId> EndpointSource::entities_with_external_id(const PropertyId& x) const {
  const auto j = sparql("SELECT DISTINCT ?item WHERE { ?item wdt:" + x.str() + " ?v . } LIMIT " +
                        std::to_string(options_.query_limit));
  std::set<EntityId> ids;
  for (const auto& b : j.at("results").at("bindings")) {
    if (auto id = entity_from_uri(b.at("item").at("value").get<std::string>())) ids.insert(EntityId(*id));
  }
  return {ids.begin(), ids.end()};
}

std::vector<EntityId> EndpointSource::entities_named(std::string_view surface,
                                                     const std::vector<std::string>& languages) const {
  // SPARQL literal matching is exact; query a few casings and filter after.
  const std::string trimmed = text::trim(surface);
  std::set<std::string> variants{trimmed, text::to_lower_ascii(trimmed)};
  if (!trimmed.empty()) {
    std::string cap = text::to_lower_ascii(trimmed);
    cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
    variants.insert(cap);
  }
  std::string values;
  for (const auto& v : variants) {
    for (const auto& lang : languages) values += " " + sparql_string(v) + "@" + lang;
  }
  const auto j = sparql("SELECT DISTINCT ?item WHERE { VALUES ?name {" + values +
                        " } { ?item rdfs:label ?name } UNION { ?item skos:altLabel ?name } } LIMIT " +
                        std::to_string(options_.query_limit));
  const std::string key = text::normalize_name(surface);
  std::set<EntityId> ids;
  for (const auto& b : j.at("results").at("bindings")) {
    const auto id = entity_from_uri(b.at("item").at("value").get<std::string>());
    if (!id) continue;
    const auto rec = fetch_record(*id);
    if (!rec) continue;
    bool match = false;
    for (const auto& lang : languages) {
      if (const auto l = rec->labels.find(lang); l != rec->labels.end() && text::normalize_name(l->second) == key) {
        match = true;
      }
      if (const auto a = rec->aliases.find(lang); a != rec->aliases.end()) {
        for (const auto& alias : a->second) match = match || text::normalize_name(alias) == key;
      }
    }
    if (match) ids.insert(rec->id);
  }
  return {ids.begin(), ids.end()};
}

std::vector<std::pair<EntityId, ClaimValue>> EndpointSource::claims_of_property(const PropertyId& p) const {
  const auto j = sparql("SELECT ?s ?o WHERE { ?s wdt:" + p.str() + " ?o . } LIMIT " +
                        std::to_string(options_.query_limit));
  std::vector<std::pair<EntityId, ClaimValue>> out;
  for (const auto& b : j.at("results").at("bindings")) {
    const auto s = entity_from_uri(b.at("s").at("value").get<std::string>());
    if (!s) continue;
    const auto& o = b.at("o");
    const auto ov = o.at("value").get<std::string>();
    if (o.value("type", "") == "uri") {
      if (const auto oid = entity_from_uri(ov)) out.emplace_back(EntityId(*s), ClaimValue::item(EntityId(*oid)));
    } else {
      out.emplace_back(EntityId(*s), ClaimValue::literal(ov));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace wex::kg
