#include "webextractor/crawl/cache.hpp"

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/files.hpp"

namespace wex::crawl {

namespace fs = std::filesystem;
using nlohmann::json;

PageSnapshot PageSnapshot::make(std::string url, TimePoint fetched_at, int http_status, std::string raw_html,
                                std::string content_type) {
  require(http_status >= 100 && http_status <= 599, ErrorCode::invalid,
          "HTTP status out of range: " + std::to_string(http_status));
  PageSnapshot s;
  s.url = std::move(url);
  s.fetched_at = fetched_at;
  s.http_status = http_status;
  s.content_hash = sha256_hex(raw_html);
  s.raw_html = std::move(raw_html);
  s.content_type = std::move(content_type);
  return s;
}

void CrawlPolicy::validate() const {
  require(per_domain_delay.count() >= 0, ErrorCode::config, "per_domain_delay must be >= 0");
  require(max_retries >= 0, ErrorCode::config, "max_retries must be >= 0");
  require(timeout.count() > 0, ErrorCode::config, "timeout must be > 0");
  require(!user_agent.empty(), ErrorCode::config, "user_agent must be set");
}

bool domain_matches(std::string_view host, std::string_view domain) {
  if (host == domain) return true;
  return host.size() > domain.size() && host.substr(host.size() - domain.size()) == domain &&
         host[host.size() - domain.size() - 1] == '.';
}

SnapshotCache::SnapshotCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_ / "objects");
  const fs::path index = dir_ / "index.json";
  if (!fs::exists(index)) return;
  try {
    const json j = json::parse(files::read_file(index));
    for (const auto& [url, e] : j.at("entries").items()) {
      index_[url] = Entry{e.at("hash").get<std::string>(), e.at("fetched_at").get<std::string>(),
                          e.at("status").get<int>(), e.value("content_type", "")};
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::integrity, "corrupt cache index " + index.string() + ": " + e.what());
  }
}

fs::path SnapshotCache::object_path(const std::string& hash) const { return dir_ / "objects" / hash; }

std::optional<std::string> SnapshotCache::object(const std::string& hash) const {
  const fs::path p = object_path(hash);
  if (hash.empty() || !fs::exists(p)) return std::nullopt;
  std::string bytes = files::read_file(p);
  require(sha256_hex(bytes) == hash, ErrorCode::integrity, "cached object " + hash + " fails its digest");
  return bytes;
}

std::optional<PageSnapshot> SnapshotCache::lookup(const std::string& url) const {
  Entry e;
  {
    std::lock_guard lock(mu_);
    auto it = index_.find(url);
    if (it == index_.end()) return std::nullopt;
    e = it->second;
  }
  auto bytes = object(e.hash);
  require(bytes.has_value(), ErrorCode::integrity, "cached object missing for " + url);
  PageSnapshot s = PageSnapshot::make(url, parse_utc(e.fetched_at), e.status, std::move(*bytes), e.content_type);
  return s;
}

void SnapshotCache::store(const PageSnapshot& snapshot) {
  require(sha256_hex(snapshot.raw_html) == snapshot.content_hash, ErrorCode::integrity,
          "snapshot hash does not match its bytes");
  const fs::path p = object_path(snapshot.content_hash);
  std::lock_guard lock(mu_);
  if (!fs::exists(p)) files::write_atomic(p, snapshot.raw_html);
  index_[snapshot.url] =
      Entry{snapshot.content_hash, format_utc(snapshot.fetched_at), snapshot.http_status, snapshot.content_type};
  write_index();
}

void SnapshotCache::write_index() const {
  json entries = json::object();
  for (const auto& [url, e] : index_) {
    entries[url] = {{"hash", e.hash}, {"fetched_at", e.fetched_at}, {"status", e.status},
                    {"content_type", e.content_type}};
  }
  files::write_atomic(dir_ / "index.json", json{{"version", 1}, {"entries", std::move(entries)}}.dump(1) + "\n");
}

std::size_t SnapshotCache::size() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

}  // namespace wex::crawl
