#pragma once

#include <chrono>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "webextractor/util/digest.hpp"

namespace wex::crawl {

struct PageSnapshot {
  std::string url;
  TimePoint fetched_at;
  int http_status = 200;
  std::string raw_html;  // bytes exactly as received
  std::string content_hash;  // sha256 of raw_html
  std::string content_type;

  // Fills content_hash; checks the status range.
  static PageSnapshot make(std::string url, TimePoint fetched_at, int http_status, std::string raw_html,
                           std::string content_type = {});

  bool ok() const { return http_status >= 200 && http_status < 300; }
};

struct CrawlPolicy {
  std::chrono::milliseconds per_domain_delay{1000};
  int max_retries = 3;
  std::chrono::milliseconds timeout{30000};
  std::string user_agent = "WebExtractor/1.0 (+https://www.wikidata.org/wiki/Wikidata:Bots)";
  std::set<std::string> blocked_domains;
  // Cached snapshots younger than this are served without a request.
  std::chrono::seconds cache_ttl{std::chrono::hours(24 * 30)};
  bool honor_robots = true;
  std::set<std::string> robots_overrides;  // domains whose robots.txt is ignored
  // Responses with these statuses mark the domain as blocking us.
  std::set<int> blocking_statuses{403, 429};

  void validate() const;
};

// host equals domain or is a subdomain of it
bool domain_matches(std::string_view host, std::string_view domain);

}  // namespace wex::crawl
