#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "webextractor/error.hpp"

namespace wex::estimate {

// Non-negative exact fraction.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational parse(std::string_view s);  // "94/100", "0.194", "19.4%", "3"
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool in_unit_interval() const { return den > 0 && num <= den; }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

struct DomainPropertyStats {
  std::string domain;    // external identifier property, e.g. "P434"
  std::string property;  // e.g. "P21"
  std::uint64_t links = 0;  // entities on the domain missing the property
  Rational freq;
  Rational acc;
  std::uint64_t freq_sample_size = 0;

  void validate() const;  // invalid error unless freq, acc in [0, 1]
};

// floor(links * freq * acc), exact.
std::uint64_t estimate_facts(const DomainPropertyStats& stats);

struct FreqMeasurement {
  Rational freq;
  std::uint64_t sample_size = 0;
  std::uint64_t hits = 0;
};

// Fraction of sampled pages on which locate() finds a value. Precondition
// error on an empty sample.
template <typename Page>
FreqMeasurement measure_freq(const std::vector<Page>& sample, const std::function<bool(const Page&)>& locate);

struct EstimateRow {
  DomainPropertyStats stats;
  std::uint64_t estimate = 0;
};

struct Aggregate {
  std::uint64_t total = 0;
  std::vector<EstimateRow> rows;  // estimate descending, then domain, property

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

Aggregate aggregate(const std::vector<DomainPropertyStats>& stats);

// Columns: domain_pid,property_pid,links,freq_num,freq_den,acc_num,acc_den
// with an optional trailing freq_sample_size.
std::vector<DomainPropertyStats> read_stats_csv(const std::filesystem::path& path);
std::vector<DomainPropertyStats> parse_stats_csv(std::string_view body);
std::string format_count(std::uint64_t n);  // 11866 -> "11,866"

// ---- template definition ----

template <typename Page>
FreqMeasurement measure_freq(const std::vector<Page>& sample, const std::function<bool(const Page&)>& locate) {
  FreqMeasurement m;
  m.sample_size = sample.size();
  require(!sample.empty(), ErrorCode::precondition, "frequency sample is empty");
  for (const auto& page : sample) {
    if (locate(page)) ++m.hits;
  }
  m.freq = {m.hits, m.sample_size};
  return m;
}

}  // namespace wex::estimate
