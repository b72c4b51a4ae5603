#include <gtest/gtest.h>

#include <httplib.h>

#include <mutex>
#include <fstream>
#include <random>
#include <thread>

#include "support.hpp"
#include "webextractor/crawl/cache.hpp"
#include "webextractor/crawl/crawler.hpp"
#include "webextractor/crawl/fetcher.hpp"
#include "webextractor/error.hpp"
#include "webextractor/util/digest.hpp"
#include "webextractor/util/files.hpp"

using namespace wex;
using namespace wex::crawl;
using wex::testkit::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid;
}

// Loopback site with per-path hit counters.
class StubSite {
 public:
  StubSite() {
    server_.Get("/hello", [this](const httplib::Request&, httplib::Response& res) {
      count("/hello");
      res.set_content("hello", "text/plain");
    });
    server_.Get(R"(/page/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
      count("/page");
      res.set_content("<p>page " + req.matches[1].str() + "</p>", "text/html");
    });
    server_.Get("/flaky", [this](const httplib::Request&, httplib::Response& res) {
      count("/flaky");
      res.status = 503;
    });
    server_.Get("/forbidden", [this](const httplib::Request&, httplib::Response& res) {
      count("/forbidden");
      res.status = 403;
    });
    server_.Get("/missing", [this](const httplib::Request&, httplib::Response& res) {
      count("/missing");
      res.status = 404;
      res.set_content("gone", "text/plain");
    });
    server_.Get("/private/x", [this](const httplib::Request&, httplib::Response& res) {
      count("/private");
      res.set_content("secret", "text/plain");
    });
    server_.Get("/robots.txt", [this](const httplib::Request&, httplib::Response& res) {
      count("/robots.txt");
      if (robots_status != 200) {
        res.status = robots_status;
        return;
      }
      res.set_content(robots, "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubSite() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  int hit(const std::string& path) {
    std::lock_guard lock(mu_);
    return hits_[path];
  }

  std::string robots = "User-agent: *\nDisallow: /private/\n";
  int robots_status = 200;

 private:
  void count(const std::string& path) {
    std::lock_guard lock(mu_);
    ++hits_[path];
  }

  std::mutex mu_;
  std::map<std::string, int> hits_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

CrawlPolicy fast_policy() {
  CrawlPolicy p;
  p.per_domain_delay = std::chrono::milliseconds(20);
  p.timeout = std::chrono::milliseconds(3000);
  p.max_retries = 2;
  return p;
}

class CrawlerTest : public ::testing::Test {
 protected:
  std::unique_ptr<StubSite> site = std::make_unique<StubSite>();
  TempDir tmp;
  std::shared_ptr<SnapshotCache> cache = std::make_shared<SnapshotCache>(tmp / "cache");

  Crawler make(CrawlPolicy policy = fast_policy(), Crawler::WallClock clock = {}) {
    if (!clock) return Crawler(std::make_shared<HttpBackend>(), cache, policy);
    return Crawler(std::make_shared<HttpBackend>(), cache, policy, clock);
  }
};

}  // namespace

TEST_F(CrawlerTest, FetchesPage) {
  auto crawler = make();
  const auto snap = crawler.fetch_page(site->url("/hello"));
  EXPECT_EQ(snap.http_status, 200);
  EXPECT_EQ(snap.raw_html, "hello");
  EXPECT_EQ(snap.content_hash, sha256_hex("hello"));
}

TEST_F(CrawlerTest, SecondFetchServedFromCache) {
  auto crawler = make();
  const auto a = crawler.fetch_page(site->url("/hello"));
  const auto b = crawler.fetch_page(site->url("/hello"));
  EXPECT_EQ(a.content_hash, b.content_hash);
  EXPECT_EQ(site->hit("/hello"), 1);
}

TEST_F(CrawlerTest, CacheSurvivesNewCrawler) {
  make().fetch_page(site->url("/hello"));
  auto again = make();
  again.fetch_page(site->url("/hello"));
  EXPECT_EQ(site->hit("/hello"), 1);
  EXPECT_EQ(again.network_requests(), 0u);
}

TEST_F(CrawlerTest, StaleCacheIsRefetched) {
  auto now = std::make_shared<TimePoint>(parse_utc("2026-01-01T00:00:00Z"));
  auto policy = fast_policy();
  policy.cache_ttl = std::chrono::hours(24);
  auto crawler = make(policy, [now] { return *now; });
  crawler.fetch_page(site->url("/hello"));
  *now += std::chrono::hours(23);
  crawler.fetch_page(site->url("/hello"));
  EXPECT_EQ(site->hit("/hello"), 1);
  *now += std::chrono::hours(2);
  crawler.fetch_page(site->url("/hello"));
  EXPECT_EQ(site->hit("/hello"), 2);
}

TEST_F(CrawlerTest, BlockedDomainIsSkipped) {
  auto policy = fast_policy();
  policy.blocked_domains.insert("127.0.0.1");
  auto crawler = make(policy);
  EXPECT_EQ(code_of([&] { crawler.fetch_page(site->url("/hello")); }), ErrorCode::skipped);
  EXPECT_EQ(site->hit("/hello"), 0);
  ASSERT_EQ(crawler.skipped().size(), 1u);
}

TEST_F(CrawlerTest, RobotsDisallowIsSkipped) {
  auto crawler = make();
  EXPECT_EQ(code_of([&] { crawler.fetch_page(site->url("/private/x")); }), ErrorCode::skipped);
  EXPECT_EQ(site->hit("/private"), 0);
  crawler.fetch_page(site->url("/hello"));
  EXPECT_EQ(site->hit("/robots.txt"), 1);  // fetched once per origin
}

TEST_F(CrawlerTest, RobotsOverrideAndOptOut) {
  auto policy = fast_policy();
  policy.robots_overrides.insert("127.0.0.1");
  EXPECT_EQ(make(policy).fetch_page(site->url("/private/x")).raw_html, "secret");
}

TEST_F(CrawlerTest, RobotsServerErrorDisallowsAll) {
  site->robots_status = 503;
  auto crawler = make();
  EXPECT_EQ(code_of([&] { crawler.fetch_page(site->url("/hello")); }), ErrorCode::skipped);
}

TEST_F(CrawlerTest, MissingRobotsAllowsAll) {
  site->robots_status = 404;
  EXPECT_EQ(make().fetch_page(site->url("/private/x")).raw_html, "secret");
}

TEST_F(CrawlerTest, ForbiddenSkipsTheDomain) {
  auto crawler = make();
  EXPECT_EQ(code_of([&] { crawler.fetch_page(site->url("/forbidden")); }), ErrorCode::skipped);
  EXPECT_EQ(code_of([&] { crawler.fetch_page(site->url("/hello")); }), ErrorCode::skipped);
  EXPECT_EQ(site->hit("/hello"), 0);
}

TEST_F(CrawlerTest, ServerErrorsRetriedThenTransport) {
  auto crawler = make();
  EXPECT_EQ(code_of([&] { crawler.fetch_page(site->url("/flaky")); }), ErrorCode::transport);
  EXPECT_EQ(site->hit("/flaky"), 3);
}

TEST_F(CrawlerTest, NotFoundIsReturnedNotThrown) {
  const auto snap = make().fetch_page(site->url("/missing"));
  EXPECT_EQ(snap.http_status, 404);
  EXPECT_FALSE(snap.ok());
}

TEST_F(CrawlerTest, BadUrlIsPrecondition) {
  EXPECT_EQ(code_of([&] { make().fetch_page("not a url"); }), ErrorCode::precondition);
}

TEST_F(CrawlerTest, CacheLookup) {
  auto crawler = make();
  EXPECT_FALSE(crawler.cache_lookup(site->url("/hello")));
  crawler.fetch_page(site->url("/hello"));
  EXPECT_TRUE(crawler.cache_lookup(site->url("/hello")));
}

TEST_F(CrawlerTest, FetchManyKeepsInputOrder) {
  auto crawler = make();
  std::vector<std::string> urls;
  for (int i = 0; i < 6; ++i) urls.push_back(site->url("/page/" + std::to_string(i)));
  urls.push_back(site->url("/flaky"));
  const auto out = crawler.fetch_many(urls, 3);
  ASSERT_EQ(out.size(), urls.size());
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(out[i].url, urls[i]);
    ASSERT_TRUE(out[i].snapshot);
    EXPECT_EQ(out[i].snapshot->raw_html, "<p>page " + std::to_string(i) + "</p>");
  }
  EXPECT_EQ(out.back().error, ErrorCode::transport);
}

TEST_F(CrawlerTest, SameDomainStartsAreSpacedByTheDelay) {
  auto policy = fast_policy();
  policy.per_domain_delay = std::chrono::milliseconds(40);
  auto crawler = make(policy);
  std::vector<std::string> urls;
  for (int i = 0; i < 8; ++i) urls.push_back(site->url("/page/" + std::to_string(i)));
  crawler.fetch_many(urls, 4);
  auto starts = crawler.gate().starts();
  ASSERT_GE(starts.size(), 9u);  // robots.txt plus the pages
  std::sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.at < b.at; });
  for (std::size_t i = 1; i < starts.size(); ++i) {
    EXPECT_GE(starts[i].at - starts[i - 1].at, policy.per_domain_delay);
  }
}

TEST(DomainRateGate, DifferentDomainsDoNotWait) {
  DomainRateGate gate(std::chrono::milliseconds(300));
  const auto t0 = DomainRateGate::Clock::now();
  { DomainRateGate::Permit a(gate, "a.test"); }
  { DomainRateGate::Permit b(gate, "b.test"); }
  EXPECT_LT(DomainRateGate::Clock::now() - t0, std::chrono::milliseconds(250));
  { DomainRateGate::Permit a(gate, "a.test"); }
  EXPECT_GE(DomainRateGate::Clock::now() - t0, std::chrono::milliseconds(300));
}

TEST(SnapshotCache, TamperedBytesAreIntegrityError) {
  TempDir tmp;
  SnapshotCache cache(tmp / "cache");
  const auto snap = PageSnapshot::make("https://x.test/a", parse_utc("2026-01-01T00:00:00Z"), 200, "<p>1997</p>");
  cache.store(snap);
  const auto object = tmp / "cache" / "objects" / snap.content_hash;
  ASSERT_TRUE(std::filesystem::exists(object));
  std::string bytes = files::read_file(object);
  bytes[3] ^= 0x01;
  std::ofstream(object, std::ios::binary | std::ios::trunc) << bytes;
  EXPECT_EQ(code_of([&] { cache.lookup("https://x.test/a"); }), ErrorCode::integrity);
}

TEST(RobotsRules, LongestMatchWinsAndAllowWinsTies) {
  const auto rules = RobotsRules::parse(
      "User-agent: other\nDisallow: /\n\nUser-agent: *\nDisallow: /a/\nAllow: /a/open\nDisallow: /*.pdf$\n",
      "WebExtractor/1.0");
  EXPECT_TRUE(rules.allowed("/"));
  EXPECT_FALSE(rules.allowed("/a/x"));
  EXPECT_TRUE(rules.allowed("/a/open/1"));
  EXPECT_FALSE(rules.allowed("/doc.pdf"));
  EXPECT_TRUE(rules.allowed("/doc.pdf?x=1"));
  EXPECT_FALSE(RobotsRules::disallow_all().allowed("/"));
  EXPECT_TRUE(RobotsRules::allow_all().allowed("/anything"));
}

TEST(RobotsRules, SpecificAgentGroupPreferred) {
  const auto rules = RobotsRules::parse("User-agent: *\nDisallow: /\n\nUser-agent: WebExtractor\nDisallow: /x\n",
                                        "WebExtractor/1.0 (+https://example.test)");
  EXPECT_TRUE(rules.allowed("/y"));
  EXPECT_FALSE(rules.allowed("/x"));
}

TEST(DomainMatches, SubdomainsOnly) {
  EXPECT_TRUE(domain_matches("musicbrainz.org", "musicbrainz.org"));
  EXPECT_TRUE(domain_matches("beta.musicbrainz.org", "musicbrainz.org"));
  EXPECT_FALSE(domain_matches("notmusicbrainz.org", "musicbrainz.org"));
  EXPECT_FALSE(domain_matches("musicbrainz.org", "beta.musicbrainz.org"));
}

TEST(FixtureBackend, ServesIndexedPagesAnd404Otherwise) {
  TempDir tmp;
  std::ofstream(tmp / "a.html") << "<p>a</p>";
  std::ofstream(tmp / "index.json") << R"({"pages":[{"url":"https://x.test/a","file":"a.html"}]})";
  const auto backend = FixtureBackend::load(tmp / "index.json");
  const auto hit = backend->fetch({"https://x.test/a"});
  EXPECT_EQ(hit.status, 200);
  EXPECT_EQ(hit.body, "<p>a</p>");
  EXPECT_EQ(backend->fetch({"https://x.test/b"}).status, 404);
  EXPECT_EQ(backend->hits(), 2u);
}

TEST(FixtureBackend, MissingIndexIsNotFound) {
  TempDir tmp;
  EXPECT_EQ(code_of([&] { FixtureBackend::load(tmp / "nope.json"); }), ErrorCode::not_found);
}

TEST(CommandBackend, StdoutIsTheBody) {
  CommandBackend backend("printf '<p>%s</p>' {url}");
  const auto res = backend.fetch({"https://x.test/a b"});
  EXPECT_EQ(res.status, 200);
  EXPECT_EQ(res.body, "<p>https://x.test/a b</p>");
}

TEST(CommandBackend, NonZeroExitIsTransport) {
  CommandBackend backend("false {url}");
  EXPECT_EQ(code_of([&] { backend.fetch({"https://x.test/"}); }), ErrorCode::transport);
}

TEST(CrawlPolicy, NegativeRetriesRejected) {
  CrawlPolicy p;
  p.max_retries = -1;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::config);
}
