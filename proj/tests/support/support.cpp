#include "support.hpp"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include <sys/wait.h>

#include "webextractor/kg/source.hpp"
#include "webextractor/util/digest.hpp"

namespace wex::testkit {

using nlohmann::json;

std::filesystem::path source_dir() { return WEBEXTRACTOR_SOURCE_DIR; }
std::filesystem::path data_dir() { return source_dir() / "data"; }

TempDir::TempDir() {
  std::string templ = (std::filesystem::temp_directory_path() / "wex-test-XXXXXX").string();
  if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
  path_ = templ;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path copy_fixture(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const char* name : {"fixture.toml", "kg.ndjson", "yield_stats.csv", "rules.json"}) {
    fs::copy_file(data_dir() / name, dir / name, fs::copy_options::overwrite_existing);
  }
  fs::copy(data_dir() / "pages", dir / "pages", fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  return dir / "fixture.toml";
}

CliResult run_cli(const std::string& args) {
  CliResult r;
  const std::string cmd = std::string("'") + WEBEXTRACTOR_CLI + "' " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

json entity_line(const EntitySpec& e) {
  json j{{"id", e.id}, {"labels", {{"en", e.label}}}, {"claims", json::object()}};
  if (!e.aliases.empty()) j["aliases"] = {{"en", e.aliases}};
  for (const auto& [p, ids] : e.items) {
    for (const auto& id : ids) j["claims"][p].push_back({{"item", id}});
  }
  for (const auto& [p, values] : e.literals) {
    for (const auto& v : values) j["claims"][p].push_back({{"value", v}});
  }
  if (!e.external_ids.empty()) j["external_ids"] = e.external_ids;
  return j;
}

json property_line(const std::string& id, const std::string& label, const std::string& datatype,
                   std::vector<std::string> aliases, const std::string& formatter) {
  json j{{"id", id}, {"labels", {{"en", label}}}, {"datatype", datatype}, {"claims", json::object()}};
  if (!aliases.empty()) j["aliases"] = {{"en", aliases}};
  if (!formatter.empty()) j["claims"]["P1630"] = json::array({{{"value", formatter}}});
  return j;
}

std::shared_ptr<kg::KnowledgeGraph> make_kg(const std::vector<json>& lines) {
  std::vector<std::string> text;
  for (const auto& l : lines) text.push_back(l.dump());
  return std::make_shared<kg::KnowledgeGraph>(kg::FixtureSource::from_lines(text));
}

std::vector<json> oxford_fixture() {
  return {
      property_line("P69", "educated at", "wikibase-item", {"alma mater"}),
      property_line("P31", "instance of", "wikibase-item"),
      property_line("P17", "country", "wikibase-item"),
      property_line("P496", "ORCID iD", "external-id", {}, "https://orcid.org/$1"),
      entity_line({"Q875538", "public university", {}, {}, {}, {}}),
      entity_line({"Q3918", "university", {}, {}, {}, {}}),
      entity_line({"Q515", "city", {}, {}, {}, {}}),
      entity_line({"Q476028", "association football club", {}, {}, {}, {}}),
      entity_line({"Q145", "United Kingdom", {}, {}, {}, {}}),
      entity_line({"Q34433", "University of Oxford", {"Oxford"}, {{"P31", {"Q875538", "Q3918"}}, {"P17", {"Q145"}}},
                   {}, {}}),
      entity_line({"Q34217", "Oxford", {}, {{"P31", {"Q515"}}, {"P17", {"Q145"}}}, {}, {}}),
      entity_line({"Q48946", "Oxford United F.C.", {"Oxford"}, {{"P31", {"Q476028"}}, {"P17", {"Q145"}}}, {}, {}}),
      entity_line({"Q90000001", "Ada Example", {}, {{"P69", {"Q34433"}}}, {}, {{"P496", "0000-0001-0000-0001"}}}),
      entity_line({"Q90000002", "Bo Example", {}, {{"P69", {"Q34433"}}}, {}, {{"P496", "0000-0001-0000-0002"}}}),
  };
}

std::shared_ptr<kg::KnowledgeGraph> bundled_kg() {
  return std::make_shared<kg::KnowledgeGraph>(kg::FixtureSource::load(data_dir() / "kg.ndjson"));
}

// ---- random HTML ----

namespace {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[rng() % v.size()];
}

struct HtmlGen {
  std::mt19937_64& rng;
  RandomHtml out;
  int counter = 0;

  std::string marker() { return "zq" + std::to_string(counter++) + "qz"; }

  std::string text() {
    static const std::vector<std::string> words{"alpha", "Beta",  "gamma", "42",    "x-y",   "caf\xC3\xA9",
                                                "na\xC3\xAFve", "(25", "years", "ago)", "Study", "Type",
                                                ":",     "Obs",   "1997",  "e=mc2", "\xE4\xB8\xAD"};
    static const std::vector<std::string> refs{"&amp;", "&lt;",   "&gt;",     "&quot;", "&#233;",
                                               "&#x41;", "&nbsp;", "&copy;", "&bogus;", "&"};
    static const std::vector<std::string> spaces{" ", "  ", "\n", "\t", " \n  "};
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      if (i > 0 || rng() % 3 == 0) s += pick(rng, spaces);
      s += rng() % 6 == 0 ? pick(rng, refs) : pick(rng, words);
    }
    if (rng() % 4 == 0) s += pick(rng, spaces);
    return s;
  }

  std::string removed() {
    const std::string m = marker();
    switch (rng() % 3) {
      case 0: {
        const std::string body = "var " + m + " = 'a < b && c > d'; // " + m;
        out.removed_bodies.push_back(body);
        return "<script type=\"text/javascript\">" + body + "</script>";
      }
      case 1: {
        const std::string body = "." + m + " { content: \"" + m + "\"; }";
        out.removed_bodies.push_back(body);
        return "<style>" + body + "</style>";
      }
      default: {
        out.removed_bodies.push_back(m);
        return rng() % 2 ? "<img src=\"/x.png\" alt=\"" + m + "\">" : "<img alt=\"" + m + "\"/>";
      }
    }
  }

  std::string node(int depth) {
    static const std::vector<std::string> kept{"div", "p", "h1", "h2", "ul", "li"};
    static const std::vector<std::string> unknown{"span", "dd", "a", "b", "td", "section", "em", "table"};
    const auto r = rng() % 12;
    if (depth <= 0 || r < 4) return text();
    if (r == 4) return removed();
    if (r == 5) return "<!--" + std::string(rng() % 2 ? "" : " note ") + "-->";
    if (r == 6) return "</" + pick(rng, unknown) + ">";  // stray end tag
    const bool is_kept = r < 9;
    const std::string tag = is_kept ? pick(rng, kept) : pick(rng, unknown);
    std::string attrs;
    if (rng() % 3 == 0) attrs = " class=\"c" + std::to_string(rng() % 9) + "\"";
    std::string s = "<" + tag + attrs + ">";
    const int children = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < children; ++i) s += node(depth - 1);
    if (rng() % 8 != 0) s += "</" + tag + ">";  // sometimes left open
    return s;
  }
};

}  // namespace

RandomHtml random_html(std::mt19937_64& rng) {
  HtmlGen g{rng, {}};
  std::string body;
  const int n = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < n; ++i) body += g.node(4);
  if (rng() % 2) {
    const std::string head = g.removed();
    g.out.html = "<!DOCTYPE html><html><head><title>t</title>" + head + "</head><body>" + body + "</body></html>";
  } else {
    g.out.html = body;
  }
  return std::move(g.out);
}

// ---- F1 oracle ----

namespace {

std::vector<std::string> oracle_tokens(const std::string& s) {
  // lower-case, drop ASCII punctuation, split on whitespace, drop articles
  std::string cleaned;
  for (unsigned char c : s) {
    if (c < 0x80 && std::ispunct(c)) continue;
    cleaned.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : cleaned + " ") {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!cur.empty() && cur != "a" && cur != "an" && cur != "the") tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return tokens;
}

// Overlap by explicit matching: each prediction token consumes one unused
// equal gold token.
std::size_t overlap(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  std::vector<bool> used(gold.size(), false);
  std::size_t n = 0;
  for (const auto& t : pred) {
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!used[i] && gold[i] == t) {
        used[i] = true;
        ++n;
        break;
      }
    }
  }
  return n;
}

}  // namespace

double oracle_f1(const std::string& prediction, const std::vector<std::string>& golds) {
  const auto p = oracle_tokens(prediction);
  const std::vector<std::string> alternatives = golds.empty() ? std::vector<std::string>{""} : golds;
  // Best score as an exact fraction num/den.
  std::size_t best_num = 0;
  std::size_t best_den = 1;
  for (const auto& g : alternatives) {
    const auto t = oracle_tokens(g);
    std::size_t num = 0;
    std::size_t den = 1;
    if (p.empty() || t.empty()) {
      num = p.empty() && t.empty() ? 1 : 0;
    } else {
      num = 2 * overlap(p, t);
      den = p.size() + t.size();
    }
    if (num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
    }
  }
  return 100.0 * (static_cast<double>(best_num) / static_cast<double>(best_den));
}

// ---- planted corpus ----

namespace {

std::string planted_name(std::size_t j) {
  static const std::vector<std::string> a{"Kor", "Vel", "Mish", "Tan", "Lob", "Quim", "Zed", "Fay", "Rup", "Sol"};
  static const std::vector<std::string> b{"dra", "vex", "nor", "lith", "mar", "gus", "pel", "tor", "wen", "zik"};
  return a[j % 10] + b[(j / 10) % 10] + " " + a[(j / 100) % 10] + b[(j / 1000) % 10] + "ix";
}

}  // namespace

PlantedCorpus planted_corpus(std::size_t pages, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PlantedCorpus c;
  c.domain = kg::ExternalIdentifier::make(kg::PropertyId("P9000"), "https://planted.test/page/$1");
  c.property = kg::PropertyId("P9001");
  c.kg_lines.push_back(property_line("P9000", "planted page id", "external-id", {}, "https://planted.test/page/$1"));
  c.kg_lines.push_back(property_line("P9001", "related entity", "wikibase-item"));

  static const std::vector<std::string> filler{"report", "list", "page", "notes", "archive", "index", "update",
                                               "summary", "record", "entry", "section", "details"};
  auto filler_text = [&] {
    std::string s;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 4); i < n; ++i) s += (i ? " " : "") + pick(rng, filler);
    return s;
  };

  std::size_t next_object = 0;
  const TimePoint fetched = parse_utc("2026-01-01T00:00:00Z");
  for (std::size_t i = 0; i < pages; ++i) {
    const std::string subject = "Q" + std::to_string(1000000 + i);
    const std::string key = "pg" + std::to_string(i);
    const std::string url = "https://planted.test/page/" + key;
    EntitySpec subj{subject, "Planted subject " + std::to_string(i), {}, {}, {}, {{"P9000", key}}};

    std::string body = "<div><h1>" + filler_text() + "</h1>";
    const std::size_t facts = 4 + rng() % 5;
    for (std::size_t f = 0; f < facts; ++f) {
      const std::size_t j = next_object++;
      const std::string name = planted_name(j);
      const std::string object = "Q" + std::to_string(2000000 + j);
      c.kg_lines.push_back(entity_line({object, name, {}, {}, {}, {}}));
      subj.items["P9001"].push_back(object);
      c.triples.push_back({kg::EntityId(subject), c.property, kg::ClaimValue::item(kg::EntityId(object))});

      // every 25th fact is never mentioned visibly
      const std::size_t mentions = j % 25 == 24 ? 0 : 1 + rng() % 2;
      for (std::size_t m = 0; m < mentions; ++m) {
        std::string shown = name;
        if (rng() % 4 == 0) shown.replace(shown.find(' '), 1, "\n  ");
        if (rng() % 5 == 0) {
          for (auto& ch : shown) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        }
        switch (rng() % 4) {
          case 0: body += "<p>" + filler_text() + " " + shown + ", " + filler_text() + "</p>"; break;
          case 1: body += "<ul><li><a href=\"/o/" + object + "\">" + shown + "</a></li></ul>"; break;
          case 2: body += "<table><tr><td>" + filler_text() + ":</td><td>" + shown + "</td></tr></table>"; break;
          default: body += "<p>(" + shown + ")</p>"; break;
        }
        ++c.planted_mentions;
      }
      if (rng() % 6 == 0) {
        body += "<script>var n = \"" + name + "\";</script>";
        ++c.hidden_mentions;
      }
    }
    body += "</div>";
    c.kg_lines.push_back(entity_line(subj));
    const std::string html = "<html><head><title>" + key + "</title><style>p{}</style></head><body>" + body +
                             "<img src=\"/logo.png\" alt=\"" + planted_name(next_object + 7) + "\"></body></html>";
    c.pages.emplace(url, crawl::PageSnapshot::make(url, fetched, 200, html, "text/html; charset=utf-8"));
  }
  return c;
}

// ---- linking ----

SeparableKg separable_kg(std::size_t golds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SeparableKg k;
  k.property = kg::PropertyId("P9100");
  k.gold_marker = kg::EntityId("Q9500001");
  k.confusable_marker = kg::EntityId("Q9500002");
  k.lines.push_back(property_line("P9100", "affiliated with", "wikibase-item"));
  k.lines.push_back(property_line("P31", "instance of", "wikibase-item"));
  k.lines.push_back(property_line("P17", "country", "wikibase-item"));
  k.lines.push_back(entity_line({k.gold_marker.str(), "research institute", {}, {}, {}, {}}));
  k.lines.push_back(entity_line({k.confusable_marker.str(), "railway station", {}, {}, {}, {}}));
  const std::size_t noise = 6;
  for (std::size_t n = 0; n < noise; ++n) {
    k.lines.push_back(entity_line({"Q95001" + std::to_string(n), "region " + std::to_string(n), {}, {}, {}, {}}));
  }
  std::size_t next_id = 9600000;
  for (std::size_t i = 0; i < golds; ++i) {
    SeparableKg::Case c;
    c.name = planted_name(i + 5000);
    c.gold = kg::EntityId("Q" + std::to_string(next_id++));
    c.subject = kg::EntityId("Q" + std::to_string(next_id++));
    c.confusables = 2 + rng() % 4;
    auto noise_id = [&] { return "Q95001" + std::to_string(rng() % noise); };
    k.lines.push_back(entity_line(
        {c.gold.str(), c.name, {}, {{"P31", {k.gold_marker.str()}}, {"P17", {noise_id()}}}, {}, {}}));
    for (std::size_t j = 0; j < c.confusables; ++j) {
      const std::string id = "Q" + std::to_string(next_id++);
      // the shared name sits in the label or in an alias
      EntitySpec conf{id, c.name, {}, {{"P31", {k.confusable_marker.str()}}, {"P17", {noise_id()}}}, {}, {}};
      if (rng() % 2) {
        conf.label = c.name + " station";
        conf.aliases = {c.name};
      }
      k.lines.push_back(entity_line(conf));
    }
    k.lines.push_back(entity_line({c.subject.str(), "member " + std::to_string(i), {}, {{"P9100", {c.gold.str()}}}, {}, {}}));
    k.cases.push_back(std::move(c));
  }
  return k;
}

// ---- proposals ----

review::FactProposal sample_proposal(const std::string& subject, const std::string& property,
                                     review::ProposalObject object, int salt) {
  review::FactProposal p;
  p.subject = kg::EntityId(subject);
  p.property = kg::PropertyId(property);
  p.object = std::move(object);
  p.domain = "P434";
  p.evidence.source_url = "https://example.test/page/" + std::to_string(salt);
  p.evidence.raw_byte_range = {100 + static_cast<std::size_t>(salt), 104 + static_cast<std::size_t>(salt)};
  p.evidence.clean_span = {10, 14};
  p.evidence.span_text = p.object.value.empty() ? "text" : p.object.value;
  p.evidence.snapshot_hash = sha256_hex("page " + std::to_string(salt));
  p.evidence.retrieved_at = "2026-01-01T00:00:00Z";
  p.extraction_score = 0.9;
  if (p.object.kind == review::ProposalObject::Kind::item) p.linking_score = 1.5;
  p.created_at = "2026-01-01T00:00:00Z";
  p.id = review::proposal_id(p);
  return p;
}

std::function<TimePoint()> ticking_clock() {
  auto t = std::make_shared<std::atomic<long>>(0);
  const TimePoint start = parse_utc("2026-01-01T00:00:00Z");
  return [t, start] { return start + std::chrono::seconds(t->fetch_add(1)); };
}

}  // namespace wex::testkit
