#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "webextractor/error.hpp"
#include "webextractor/estimate/estimator.hpp"
#include "webextractor/html/normalizer.hpp"

using namespace wex;
using namespace wex::estimate;

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

DomainPropertyStats stats(std::uint64_t links, Rational freq, Rational acc, std::string domain = "P434",
                          std::string property = "P21") {
  DomainPropertyStats s;
  s.domain = std::move(domain);
  s.property = std::move(property);
  s.links = links;
  s.freq = freq;
  s.acc = acc;
  return s;
}

// Independent oracle: one big product then one division. Only valid while
// links * fn * an fits in 128 bits, which the generators below guarantee.
std::uint64_t oracle_estimate(std::uint64_t links, Rational f, Rational a) {
  __extension__ typedef unsigned __int128 u128;
  const u128 num = static_cast<u128>(links) * f.num * a.num;
  const u128 den = static_cast<u128>(f.den) * a.den;
  return static_cast<std::uint64_t>(num / den);
}

Rational random_fraction(std::mt19937_64& rng) {
  const std::uint64_t den = 1 + rng() % 100000;
  return {rng() % (den + 1), den};
}

}  // namespace

TEST(EstimateFacts, WorkedExample) {
  EXPECT_EQ(estimate_facts(stats(65074, {94, 100}, Rational::parse("0.194"))), 11866u);
  EXPECT_EQ(estimate_facts(stats(65074, Rational::parse("94/100"), Rational::parse("19.4%"))), 11866u);
  EXPECT_EQ(estimate_facts(stats(65074, {94, 100}, {194, 1000})), 11866u);
}

TEST(EstimateFacts, ForcedArithmetic) {
  EXPECT_EQ(estimate_facts(stats(1000, {1, 2}, {1, 2})), 250u);
  EXPECT_EQ(estimate_facts(stats(1000, {0, 1}, {1, 2})), 0u);
  EXPECT_EQ(estimate_facts(stats(0, {1, 1}, {1, 1})), 0u);
  EXPECT_EQ(estimate_facts(stats(7, {1, 1}, {1, 1})), 7u);
}

TEST(EstimateFacts, OutOfRangeIsInvalid) {
  EXPECT_EQ(code_of([] { estimate_facts(stats(10, {3, 2}, {1, 2})); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([] { estimate_facts(stats(10, {1, 2}, {5, 4})); }), ErrorCode::invalid);
}

TEST(EstimateFacts, MatchesOracleOnRandomStats) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t links = rng() % 100000000;
    const auto f = random_fraction(rng);
    const auto a = random_fraction(rng);
    ASSERT_EQ(estimate_facts(stats(links, f, a)), oracle_estimate(links, f, a)) << links << " " << f.str() << " " << a.str();
  }
}

TEST(EstimateFacts, HugeLinksDoNotOverflow) {
  const std::uint64_t links = std::numeric_limits<std::uint64_t>::max();
  EXPECT_EQ(estimate_facts(stats(links, {1, 1}, {1, 1})), links);
  EXPECT_EQ(estimate_facts(stats(links, {1, 2}, {1, 1})), links / 2);
}

TEST(EstimateFacts, MonotoneBoundedAndZeroing) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t links = rng() % 1000000;
    const auto f = random_fraction(rng);
    const auto a = random_fraction(rng);
    const auto base = estimate_facts(stats(links, f, a));
    ASSERT_LE(base, links);
    ASSERT_GE(estimate_facts(stats(links + 1 + rng() % 1000, f, a)), base);
    if (f.num < f.den) ASSERT_GE(estimate_facts(stats(links, {f.num + 1, f.den}, a)), base);
    if (a.num < a.den) ASSERT_GE(estimate_facts(stats(links, f, {a.num + 1, a.den})), base);
    ASSERT_EQ(estimate_facts(stats(links, {0, f.den}, a)), 0u);
    ASSERT_EQ(estimate_facts(stats(links, f, {0, a.den})), 0u);
    ASSERT_EQ(estimate_facts(stats(0, f, a)), 0u);
  }
}

TEST(Rational, Parsing) {
  EXPECT_EQ(Rational::parse("94/100").str(), "47/50");
  EXPECT_EQ(Rational::parse("0.194").str(), "97/500");
  EXPECT_EQ(Rational::parse("19.4%").str(), "97/500");
  EXPECT_EQ(Rational::parse("3").str(), "3/1");
  EXPECT_EQ(Rational::parse(".5").str(), "1/2");
  for (const char* bad : {"", "a/b", "1/0", "1.2.3", "-1/2", "1/ "}) {
    EXPECT_EQ(code_of([&] { Rational::parse(bad); }), ErrorCode::invalid) << bad;
  }
}

TEST(MeasureFreq, NinetyFourOfHundred) {
  std::vector<html::CleanDocument> pages;
  for (int i = 0; i < 100; ++i) {
    pages.push_back(html::normalize(i < 94 ? "<p>Gender: Female</p>" : "<p>Gender not listed</p>"));
  }
  const std::function<bool(const html::CleanDocument&)> locate = [](const html::CleanDocument& d) {
    return d.visible_text().find("Female") != std::string::npos;
  };
  const auto m = measure_freq(pages, locate);
  EXPECT_EQ(m.hits, 94u);
  EXPECT_EQ(m.sample_size, 100u);
  EXPECT_DOUBLE_EQ(m.freq.value(), 0.94);
}

TEST(MeasureFreq, NoneAndThreeOfFour) {
  const std::function<bool(const int&)> even = [](const int& x) { return x % 2 == 0; };
  EXPECT_DOUBLE_EQ(measure_freq(std::vector<int>{1, 3, 5}, even).freq.value(), 0.0);
  EXPECT_DOUBLE_EQ(measure_freq(std::vector<int>{2, 4, 5, 6}, even).freq.value(), 0.75);
  EXPECT_EQ(code_of([&] { measure_freq(std::vector<int>{}, even); }), ErrorCode::precondition);
}

TEST(MeasureFreq, ThreeOfFourPlantedPages) {
  // the fourth page only carries the value inside a script
  const std::vector<std::string> raw = {
      "<html><body><p>Label: Deutsche Grammophon</p></body></html>",
      "<html><body><div><span>Deutsche</span> <b>Grammophon</b></div></body></html>",
      "<html><body><ul><li>Label</li><li>Deutsche Grammophon</li></ul></body></html>",
      "<html><head><script>var label = 'Deutsche Grammophon';</script></head><body><p>No label</p></body></html>"};
  std::vector<html::CleanDocument> pages;
  for (const auto& r : raw) pages.push_back(html::normalize(r));
  const std::function<bool(const html::CleanDocument&)> locate = [](const html::CleanDocument& d) {
    return d.visible_text().find("Deutsche Grammophon") != std::string::npos;
  };
  const auto m = measure_freq(pages, locate);
  EXPECT_EQ(m.freq.str(), "3/4");
  EXPECT_DOUBLE_EQ(m.freq.value(), 0.75);
}

TEST(Aggregate, SumsAndSorts) {
  const auto a = aggregate({stats(20, {1, 2}, {1, 1}, "P1", "P2"), stats(20, {1, 1}, {1, 1}, "P1", "P3"),
                            stats(10, {1, 1}, {1, 1}, "P0", "P9")});
  EXPECT_EQ(a.total, 40u);
  ASSERT_EQ(a.rows.size(), 3u);
  EXPECT_EQ(a.rows[0].estimate, 20u);
  EXPECT_EQ(a.rows[1].stats.domain, "P0");
  EXPECT_EQ(a.rows[2].stats.domain, "P1");
  EXPECT_EQ(aggregate({stats(10, {1, 1}, {1, 1}), stats(20, {1, 1}, {1, 1})}).total, 30u);
  const auto empty = aggregate({});
  EXPECT_EQ(empty.total, 0u);
  EXPECT_TRUE(empty.rows.empty());
  EXPECT_EQ(empty.to_json()["total"], 0);
}

TEST(Aggregate, BundledStatsFile) {
  const auto rows = read_stats_csv(testkit::data_dir() / "yield_stats.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].freq_sample_size, 100u);
  const auto a = aggregate(rows);
  EXPECT_EQ(a.total, 11866u);
  EXPECT_EQ(format_count(a.total), "11,866");
  EXPECT_NE(a.to_csv().find("P434,P21,65074,47,50,97,500,11866"), std::string::npos);
  EXPECT_EQ(a.to_json()["rows"][0]["estimate"], 11866);
}

TEST(Aggregate, RecomputingFromSerializedStatsIsIdentical) {
  std::mt19937_64 rng(21);
  std::vector<DomainPropertyStats> in;
  for (int i = 0; i < 50; ++i) {
    in.push_back(stats(rng() % 1000000, random_fraction(rng), random_fraction(rng), "P" + std::to_string(rng() % 50),
                       "P" + std::to_string(rng() % 50)));
  }
  const auto first = aggregate(in);
  std::string csv = "domain_pid,property_pid,links,freq_num,freq_den,acc_num,acc_den\n";
  for (const auto& s : in) {
    csv += s.domain + "," + s.property + "," + std::to_string(s.links) + "," + std::to_string(s.freq.num) + "," +
           std::to_string(s.freq.den) + "," + std::to_string(s.acc.num) + "," + std::to_string(s.acc.den) + "\n";
  }
  const auto second = aggregate(parse_stats_csv(csv));
  EXPECT_EQ(first.total, second.total);
  ASSERT_EQ(first.rows.size(), second.rows.size());
  // parsing reduces fractions, so compare values rather than text
  for (std::size_t i = 0; i < first.rows.size(); ++i) {
    EXPECT_EQ(first.rows[i].estimate, second.rows[i].estimate);
    EXPECT_EQ(first.rows[i].stats.freq.value(), second.rows[i].stats.freq.value());
  }
  EXPECT_EQ(first.to_json().dump(), aggregate(in).to_json().dump());
}

TEST(StatsCsv, Errors) {
  EXPECT_EQ(code_of([] { parse_stats_csv("P1,P2,10,1,2\n"); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([] { parse_stats_csv("P1,P2,10,3,2,1,1\n"); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([] { parse_stats_csv("P1,P2,x,1,2,1,1\n"); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([] { parse_stats_csv("P1,P2,10,1,0,1,1\n"); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([] { read_stats_csv("/nonexistent/stats.csv"); }), ErrorCode::not_found);
  EXPECT_TRUE(parse_stats_csv("# comment\n\n").empty());
}

TEST(FormatCount, Grouping) {
  EXPECT_EQ(format_count(0), "0");
  EXPECT_EQ(format_count(999), "999");
  EXPECT_EQ(format_count(1000), "1,000");
  EXPECT_EQ(format_count(7543444), "7,543,444");
}
