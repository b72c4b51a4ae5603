#include "webextractor/crawl/crawler.hpp"

#include <atomic>
#include <thread>

#include "webextractor/util/text.hpp"
#include "webextractor/util/url.hpp"

namespace wex::crawl {

DomainRateGate::Permit::Permit(DomainRateGate& gate, std::string domain) : gate_(gate), domain_(std::move(domain)) {
  std::unique_lock lock(gate_.mu_);
  gate_.cv_.wait(lock, [&] { return !gate_.slots_[domain_].busy; });
  Slot& slot = gate_.slots_[domain_];
  slot.busy = true;
  if (slot.last_start) {
    const auto ready = *slot.last_start + gate_.delay_;
    lock.unlock();
    std::this_thread::sleep_until(ready);
    lock.lock();
  }
  const auto now = Clock::now();
  gate_.slots_[domain_].last_start = now;
  gate_.starts_.push_back({domain_, now});
}

DomainRateGate::Permit::~Permit() {
  {
    std::lock_guard lock(gate_.mu_);
    gate_.slots_[domain_].busy = false;
  }
  gate_.cv_.notify_all();
}

std::vector<DomainRateGate::Start> DomainRateGate::starts() const {
  std::lock_guard lock(mu_);
  return starts_;
}

RobotsRules RobotsRules::disallow_all() {
  RobotsRules r;
  r.rules_.push_back({"/", false});
  return r;
}

RobotsRules RobotsRules::parse(std::string_view body, std::string_view user_agent) {
  // Product token of our agent, e.g. "webextractor" from "WebExtractor/1.0 (...)".
  std::string token = text::to_lower_ascii(user_agent.substr(0, user_agent.find_first_of("/ ")));
  struct Group {
    std::vector<std::string> agents;
    std::vector<Rule> rules;
  };
  std::vector<Group> groups;
  bool in_agents = false;
  for (std::string line : text::split(body, '\n')) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = text::to_lower_ascii(text::trim(line.substr(0, colon)));
    const std::string value = text::trim(line.substr(colon + 1));
    if (key == "user-agent") {
      if (!in_agents) groups.emplace_back();
      groups.back().agents.push_back(text::to_lower_ascii(value));
      in_agents = true;
    } else if (key == "allow" || key == "disallow") {
      in_agents = false;
      if (groups.empty()) continue;
      if (key == "disallow" && value.empty()) continue;  // "Disallow:" allows everything
      groups.back().rules.push_back({value, key == "allow"});
    } else {
      in_agents = false;
    }
  }
  const Group* chosen = nullptr;
  for (const auto& g : groups) {
    for (const auto& a : g.agents) {
      if (a != "*" && !token.empty() && token.find(a) != std::string::npos) chosen = &g;
    }
    if (chosen) break;
  }
  if (!chosen) {
    for (const auto& g : groups) {
      for (const auto& a : g.agents) {
        if (a == "*") chosen = &g;
      }
      if (chosen) break;
    }
  }
  RobotsRules r;
  if (chosen) r.rules_ = chosen->rules;
  return r;
}

namespace {

bool robots_match(std::string_view pattern, std::string_view path) {
  // Iterative wildcard match with backtracking on the last '*'.
  std::size_t p = 0, s = 0, star = std::string_view::npos, mark = 0;
  while (true) {
    if (p < pattern.size() && pattern[p] == '$' && p + 1 == pattern.size()) return s == path.size();
    if (p == pattern.size()) return true;  // prefix match
    if (pattern[p] == '*') {
      star = p++;
      mark = s;
      continue;
    }
    if (s < path.size() && pattern[p] == path[s]) {
      ++p;
      ++s;
      continue;
    }
    if (star == std::string_view::npos || mark >= path.size()) return false;
    p = star + 1;
    s = ++mark;
  }
}

}  // namespace

bool RobotsRules::allowed(std::string_view path) const {
  const Rule* best = nullptr;
  for (const auto& r : rules_) {
    if (!robots_match(r.pattern, path)) continue;
    if (!best || r.pattern.size() > best->pattern.size() ||
        (r.pattern.size() == best->pattern.size() && r.allow && !best->allow)) {
      best = &r;
    }
  }
  return !best || best->allow;
}

Crawler::Crawler(std::shared_ptr<FetchBackend> backend, std::shared_ptr<SnapshotCache> cache, CrawlPolicy policy,
                 WallClock clock)
    : backend_(std::move(backend)),
      cache_(std::move(cache)),
      policy_(std::move(policy)),
      clock_(std::move(clock)),
      gate_(policy_.per_domain_delay) {
  policy_.validate();
}

bool Crawler::blocked(const std::string& host) const {
  for (const auto& d : policy_.blocked_domains) {
    if (domain_matches(host, d)) return true;
  }
  std::lock_guard lock(mu_);
  for (const auto& d : runtime_blocked_) {
    if (domain_matches(host, d)) return true;
  }
  return false;
}

void Crawler::record_skip(const std::string& host, const std::string& url, const std::string& reason) {
  std::lock_guard lock(mu_);
  skipped_.push_back({host, url, reason});
}

std::vector<SkipRecord> Crawler::skipped() const {
  std::lock_guard lock(mu_);
  return skipped_;
}

std::size_t Crawler::network_requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

FetchResponse Crawler::request(const std::string& host, const std::string& url) {
  DomainRateGate::Permit permit(gate_, host);
  {
    std::lock_guard lock(mu_);
    ++requests_;
  }
  return backend_->fetch({url, policy_.timeout, policy_.user_agent});
}

const RobotsRules& Crawler::robots_for(const std::string& origin, const std::string& host) {
  {
    std::lock_guard lock(mu_);
    if (auto it = robots_.find(origin); it != robots_.end()) return it->second;
  }
  RobotsRules rules;
  try {
    const FetchResponse res = request(host, origin + "/robots.txt");
    if (res.status >= 200 && res.status < 300) rules = RobotsRules::parse(res.body, policy_.user_agent);
    else if (res.status >= 500) rules = RobotsRules::disallow_all();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::transport) throw;
    rules = RobotsRules::disallow_all();
  }
  std::lock_guard lock(mu_);
  return robots_.try_emplace(origin, std::move(rules)).first->second;
}

PageSnapshot Crawler::fetch_page(const std::string& url) {
  const Url parsed = Url::parse(url);
  const std::string& host = parsed.host;
  if (blocked(host)) {
    record_skip(host, url, "blocked domain");
    fail(ErrorCode::skipped, "domain " + host + " is blocked");
  }
  const TimePoint now = clock_();
  if (auto cached = cache_->lookup(url); cached && now - cached->fetched_at < policy_.cache_ttl) return *cached;

  bool overridden = false;
  for (const auto& d : policy_.robots_overrides) overridden = overridden || domain_matches(host, d);
  if (policy_.honor_robots && !overridden && !robots_for(parsed.origin(), host).allowed(parsed.path_and_query)) {
    record_skip(host, url, "robots.txt");
    fail(ErrorCode::skipped, "robots.txt disallows " + url);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
    FetchResponse res;
    try {
      res = request(host, url);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::transport) throw;
      last_error = e.what();
      continue;
    }
    if (policy_.blocking_statuses.count(res.status)) {
      {
        std::lock_guard lock(mu_);
        runtime_blocked_.insert(host);
      }
      record_skip(host, url, "HTTP " + std::to_string(res.status));
      fail(ErrorCode::skipped, "domain " + host + " blocked our request (HTTP " + std::to_string(res.status) + ")");
    }
    if (res.status >= 500 || res.status < 100) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    PageSnapshot snap = PageSnapshot::make(url, clock_(), res.status, std::move(res.body), res.content_type);
    cache_->store(snap);
    return snap;
  }
  fail(ErrorCode::transport, "fetching " + url + " failed after " + std::to_string(policy_.max_retries + 1) +
                                 " attempts: " + last_error);
}

std::vector<FetchOutcome> Crawler::fetch_many(const std::vector<std::string>& urls, std::size_t workers) {
  std::vector<FetchOutcome> out(urls.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < urls.size(); i = next++) {
      out[i].url = urls[i];
      try {
        out[i].snapshot = fetch_page(urls[i]);
      } catch (const Error& e) {
        out[i].error = e.code();
        out[i].message = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, urls.size()));
  for (std::size_t k = 0; k < n; ++k) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace wex::crawl
