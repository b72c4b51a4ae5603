#include <algorithm>

#include "webextractor/error.hpp"
#include "webextractor/kg/source.hpp"
#include "webextractor/util/files.hpp"
#include "webextractor/util/text.hpp"

namespace wex::kg {

namespace {

EntityRecord parse_record(const nlohmann::json& j) {
  EntityRecord rec;
  if (j.contains("labels")) {
    for (const auto& [lang, label] : j.at("labels").items()) rec.labels[lang] = label.get<std::string>();
  }
  if (j.contains("aliases")) {
    for (const auto& [lang, list] : j.at("aliases").items()) {
      rec.aliases[lang] = list.get<std::vector<std::string>>();
    }
  }
  if (j.contains("claims")) {
    for (const auto& [pid, values] : j.at("claims").items()) {
      auto& out = rec.claims[PropertyId(pid)];
      for (const auto& v : values) out.push_back(claim_value_from_json(v));
    }
  }
  if (j.contains("external_ids")) {
    for (const auto& [pid, value] : j.at("external_ids").items()) {
      rec.external_ids[PropertyId(pid)] = value.get<std::string>();
    }
  }
  return rec;
}

}  // namespace

std::shared_ptr<FixtureSource> FixtureSource::load(const std::filesystem::path& path) {
  return from_lines(files::read_lines(path));
}

std::shared_ptr<FixtureSource> FixtureSource::from_lines(const std::vector<std::string>& lines) {
  std::shared_ptr<FixtureSource> src(new FixtureSource());
  for (std::size_t i = 0; i < lines.size(); ++i) src->add_line(lines[i], i + 1);
  src->finish();
  return src;
}

void FixtureSource::add_line(const std::string& line, std::size_t line_no) {
  if (text::trim(line).empty()) return;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config, "fixture line " + std::to_string(line_no) + ": " + e.what());
  }
  const auto id = j.at("id").get<std::string>();
  EntityRecord rec = parse_record(j);
  if (!id.empty() && id.front() == 'P') {
    rec.id = EntityId(id);
    rec.datatype = j.value("datatype", "");
    properties_[PropertyId(id)] = std::move(rec);
  } else {
    rec.id = EntityId(id);
    require(!entities_.count(rec.id), ErrorCode::config, "duplicate fixture entity " + id);
    entities_[rec.id] = std::move(rec);
  }
}

void FixtureSource::finish() {
  for (const auto& [id, rec] : entities_) {
    for (const auto& [pid, value] : rec.external_ids) {
      const auto it = properties_.find(pid);
      require(it != properties_.end(), ErrorCode::config,
              id.str() + " uses external id " + pid.str() + " with no property record");
      require(it->second.datatype == "external-id", ErrorCode::config,
              id.str() + ": " + pid.str() + " is not an external-identifier property");
    }
    for (const auto& [lang, label] : rec.labels) name_index_[text::normalize_name(label)][lang].insert(id);
    for (const auto& [lang, list] : rec.aliases) {
      for (const auto& alias : list) name_index_[text::normalize_name(alias)][lang].insert(id);
    }
  }
}

std::optional<EntityRecord> FixtureSource::find_entity(const EntityId& id) const {
  const auto it = entities_.find(id);
  if (it == entities_.end()) return std::nullopt;
  return it->second;
}

std::optional<EntityRecord> FixtureSource::find_property_record(const PropertyId& id) const {
  const auto it = properties_.find(id);
  if (it == properties_.end()) return std::nullopt;
  return it->second;
}

std::vector<EntityId> FixtureSource::entities_with_external_id(const PropertyId& x) const {
  std::vector<EntityId> out;
  for (const auto& [id, rec] : entities_) {
    if (rec.external_ids.count(x)) out.push_back(id);
  }
  return out;
}

std::vector<EntityId> FixtureSource::entities_named(std::string_view surface,
                                                    const std::vector<std::string>& languages) const {
  const auto it = name_index_.find(text::normalize_name(surface));
  if (it == name_index_.end()) return {};
  std::set<EntityId> ids;
  for (const auto& lang : languages) {
    if (const auto l = it->second.find(lang); l != it->second.end()) ids.insert(l->second.begin(), l->second.end());
  }
  return {ids.begin(), ids.end()};
}

std::vector<std::pair<EntityId, ClaimValue>> FixtureSource::claims_of_property(const PropertyId& p) const {
  std::vector<std::pair<EntityId, ClaimValue>> out;
  for (const auto& [id, rec] : entities_) {
    const auto it = rec.claims.find(p);
    if (it == rec.claims.end()) continue;
    for (const auto& v : it->second) out.emplace_back(id, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace wex::kg
