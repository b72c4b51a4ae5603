#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "webextractor/crawl/cache.hpp"
#include "webextractor/crawl/fetcher.hpp"
#include "webextractor/crawl/snapshot.hpp"
#include "webextractor/error.hpp"

namespace wex::crawl {

// Serializes requests per domain and spaces their start times by at least
// the configured delay.
class DomainRateGate {
 public:
  using Clock = std::chrono::steady_clock;

  explicit DomainRateGate(std::chrono::milliseconds delay) : delay_(delay) {}

  class Permit {
   public:
    Permit(DomainRateGate& gate, std::string domain);
    ~Permit();
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

   private:
    DomainRateGate& gate_;
    std::string domain_;
  };

  struct Start {
    std::string domain;
    Clock::time_point at;
  };
  std::vector<Start> starts() const;

 private:
  struct Slot {
    bool busy = false;
    std::optional<Clock::time_point> last_start;
  };

  std::chrono::milliseconds delay_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, Slot> slots_;
  std::vector<Start> starts_;
};

// Parsed robots.txt: the group for our agent (or "*") as allow/disallow rules.
class RobotsRules {
 public:
  static RobotsRules parse(std::string_view body, std::string_view user_agent);
  static RobotsRules allow_all() { return {}; }
  static RobotsRules disallow_all();

  // Longest matching rule wins; allow wins a tie. Supports '*' and '$'.
  bool allowed(std::string_view path) const;

 private:
  struct Rule {
    std::string pattern;
    bool allow = false;
  };
  std::vector<Rule> rules_;
};

struct FetchOutcome {
  std::string url;
  std::optional<PageSnapshot> snapshot;
  std::optional<ErrorCode> error;
  std::string message;
};

struct SkipRecord {
  std::string domain;
  std::string url;
  std::string reason;
};

class Crawler {
 public:
  using WallClock = std::function<TimePoint()>;

  Crawler(std::shared_ptr<FetchBackend> backend, std::shared_ptr<SnapshotCache> cache, CrawlPolicy policy,
          WallClock clock = [] { return std::chrono::system_clock::now(); });

  // Cached snapshot when fresh, else a polite fetch that is then cached.
  // Errors: precondition (bad URL), skipped (blocked domain or robots),
  // transport (failures after retries).
  PageSnapshot fetch_page(const std::string& url);

  // fetch_page over many URLs with a bounded worker pool; never throws for
  // per-URL failures.
  std::vector<FetchOutcome> fetch_many(const std::vector<std::string>& urls, std::size_t workers = 4);

  std::optional<PageSnapshot> cache_lookup(const std::string& url) const { return cache_->lookup(url); }

  std::vector<SkipRecord> skipped() const;
  std::size_t network_requests() const;
  const DomainRateGate& gate() const { return gate_; }
  const CrawlPolicy& policy() const { return policy_; }

 private:
  bool blocked(const std::string& host) const;
  void record_skip(const std::string& host, const std::string& url, const std::string& reason);
  const RobotsRules& robots_for(const std::string& origin, const std::string& host);
  FetchResponse request(const std::string& host, const std::string& url);

  std::shared_ptr<FetchBackend> backend_;
  std::shared_ptr<SnapshotCache> cache_;
  CrawlPolicy policy_;
  WallClock clock_;
  DomainRateGate gate_;

  mutable std::mutex mu_;
  std::set<std::string> runtime_blocked_;
  std::vector<SkipRecord> skipped_;
  std::map<std::string, RobotsRules> robots_;
  std::size_t requests_ = 0;
};

}  // namespace wex::crawl
