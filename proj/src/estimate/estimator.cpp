#include "webextractor/estimate/estimator.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include <nlohmann/json.hpp>

#include "webextractor/util/files.hpp"
#include "webextractor/util/text.hpp"

namespace wex::estimate {

using nlohmann::json;

namespace {

__extension__ typedef unsigned __int128 u128;

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  const std::string t = text::trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  require(ec == std::errc() && ptr == t.data() + t.size() && !t.empty(), ErrorCode::invalid,
          "bad " + std::string(what) + " '" + t + "'");
  return v;
}

Rational reduced(std::uint64_t num, std::uint64_t den) {
  require(den > 0, ErrorCode::invalid, "zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

}  // namespace

Rational Rational::parse(std::string_view s_in) {
  std::string s = text::trim(s_in);
  require(!s.empty(), ErrorCode::invalid, "empty fraction");
  std::uint64_t scale = 1;
  if (s.back() == '%') {
    s.pop_back();
    scale = 100;
  }
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const auto num = parse_u64(s.substr(0, slash), "numerator");
    const auto den = parse_u64(s.substr(slash + 1), "denominator");
    return reduced(num, den * scale);
  }
  const auto dot = s.find('.');
  if (dot == std::string::npos) return reduced(parse_u64(s, "number"), scale);
  const std::string whole = s.substr(0, dot);
  const std::string frac = s.substr(dot + 1);
  require(frac.size() <= 18, ErrorCode::invalid, "too many decimals in '" + s + "'");
  std::uint64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::uint64_t num = (whole.empty() ? 0 : parse_u64(whole, "number")) * den +
                            (frac.empty() ? 0 : parse_u64(frac, "decimals"));
  return reduced(num, den * scale);
}

void DomainPropertyStats::validate() const {
  require(freq.in_unit_interval(), ErrorCode::invalid, domain + "/" + property + ": freq outside [0, 1]");
  require(acc.in_unit_interval(), ErrorCode::invalid, domain + "/" + property + ": acc outside [0, 1]");
}

std::uint64_t estimate_facts(const DomainPropertyStats& s) {
  s.validate();
  const u128 num = static_cast<u128>(s.links) * s.freq.num;
  const u128 den = static_cast<u128>(s.freq.den) * s.acc.den;
  // links*fn*an/(fd*ad) = (links*fn/fd) * an/ad; keep it exact in two steps.
  const u128 q = num / den;
  const u128 r = num % den;
  const u128 result = q * s.acc.num + (r * s.acc.num) / den;
  return static_cast<std::uint64_t>(result);
}

json Aggregate::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"domain", r.stats.domain},
                         {"property", r.stats.property},
                         {"links", r.stats.links},
                         {"freq", r.stats.freq.str()},
                         {"acc", r.stats.acc.str()},
                         {"freq_sample_size", r.stats.freq_sample_size},
                         {"estimate", r.estimate}});
  }
  return {{"total", total}, {"rows", std::move(rows_json)}};
}

std::string Aggregate::to_csv() const {
  std::string out = "domain_pid,property_pid,links,freq_num,freq_den,acc_num,acc_den,estimate\n";
  for (const auto& r : rows) {
    const auto& s = r.stats;
    out += s.domain + "," + s.property + "," + std::to_string(s.links) + "," + std::to_string(s.freq.num) + "," +
           std::to_string(s.freq.den) + "," + std::to_string(s.acc.num) + "," + std::to_string(s.acc.den) + "," +
           std::to_string(r.estimate) + "\n";
  }
  out += "TOTAL,,,,,,," + std::to_string(total) + "\n";
  return out;
}

Aggregate aggregate(const std::vector<DomainPropertyStats>& stats) {
  Aggregate a;
  for (const auto& s : stats) {
    const std::uint64_t e = estimate_facts(s);
    a.rows.push_back({s, e});
    a.total += e;
  }
  std::sort(a.rows.begin(), a.rows.end(), [](const EstimateRow& x, const EstimateRow& y) {
    if (x.estimate != y.estimate) return x.estimate > y.estimate;
    if (x.stats.domain != y.stats.domain) return x.stats.domain < y.stats.domain;
    return x.stats.property < y.stats.property;
  });
  return a;
}

std::vector<DomainPropertyStats> parse_stats_csv(std::string_view body) {
  std::vector<DomainPropertyStats> out;
  std::size_t line_no = 0;
  for (std::string line : text::split(body, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, ',');
    if (line_no == 1 && text::trim(cols[0]) == "domain_pid") continue;
    const std::string where = "stats line " + std::to_string(line_no) + ": ";
    require(cols.size() == 7 || cols.size() == 8, ErrorCode::invalid, where + "expected 7 or 8 columns");
    try {
      DomainPropertyStats s;
      s.domain = text::trim(cols[0]);
      s.property = text::trim(cols[1]);
      s.links = parse_u64(cols[2], "links");
      s.freq = reduced(parse_u64(cols[3], "freq_num"), parse_u64(cols[4], "freq_den"));
      s.acc = reduced(parse_u64(cols[5], "acc_num"), parse_u64(cols[6], "acc_den"));
      s.freq_sample_size = cols.size() == 8 ? parse_u64(cols[7], "freq_sample_size") : 0;
      s.validate();
      out.push_back(std::move(s));
    } catch (const Error& e) {
      fail(e.code(), where + e.what());
    }
  }
  return out;
}

std::vector<DomainPropertyStats> read_stats_csv(const std::filesystem::path& path) {
  return parse_stats_csv(files::read_file(path));
}

std::string format_count(std::uint64_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace wex::estimate
