#include "webextractor/dataset/dataset.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/digest.hpp"
#include "webextractor/util/files.hpp"
#include "webextractor/util/text.hpp"

namespace wex::dataset {

using nlohmann::json;

QuestionSources parse_question_sources(std::string_view s) {
  if (s == "labels") return QuestionSources::labels;
  if (s == "labels+aliases") return QuestionSources::labels_and_aliases;
  fail(ErrorCode::config, "question_sources must be 'labels' or 'labels+aliases', got '" + std::string(s) + "'");
}

std::vector<std::string> formulate_questions(const kg::PropertyInfo& property, QuestionSources sources) {
  std::vector<std::string> names;
  for (const auto& l : property.labels) {
    if (!text::trim(l).empty()) names.push_back(l);
  }
  require(!names.empty(), ErrorCode::precondition, "property " + property.id.str() + " has no label");
  if (sources == QuestionSources::labels_and_aliases) {
    names.insert(names.end(), property.aliases.begin(), property.aliases.end());
  }
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& n : names) {
    const std::string name = text::collapse_whitespace(n);
    if (name.empty()) continue;
    std::string q = name + " ?";
    if (seen.insert(q).second) out.push_back(std::move(q));
  }
  return out;
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::none: return "none";
  }
  return "none";
}

namespace {

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  return Split::none;
}

std::u32string fold(std::u32string_view s) {
  std::u32string out(s);
  for (char32_t& c : out) c = text::simple_fold(c);
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& salt) {
  return seed ^ std::stoull(stable_id({salt}, 16), nullptr, 16);
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle.
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::vector<Answer> find_mentions(const html::CleanDocument& doc, std::string_view name) {
  const std::u32string needle = fold(text::to_utf32(text::collapse_whitespace(text::nfc(name))));
  std::vector<Answer> out;
  if (needle.empty()) return out;
  const std::u32string chars = text::to_utf32(doc.text());
  const std::u32string hay = fold(chars);
  const bool word_start = text::is_word_char(needle.front());
  const bool word_end = text::is_word_char(needle.back());
  for (const auto& [a, b] : doc.visible_runs()) {
    for (std::size_t i = a; i + needle.size() <= b;) {
      if (hay.compare(i, needle.size(), needle) != 0 ||
          (word_start && i > a && text::is_word_char(chars[i - 1])) ||
          (word_end && i + needle.size() < b && text::is_word_char(chars[i + needle.size()]))) {
        ++i;
        continue;
      }
      const std::size_t end = i + needle.size();
      out.push_back({i, end, text::to_utf8(std::u32string_view(chars).substr(i, needle.size()))});
      i = end;
    }
  }
  return out;
}

json GenerationStats::to_json() const {
  return {{"triples", triples},       {"duplicates", duplicates}, {"missing_snapshot", missing_snapshot},
          {"no_mention", no_mention}, {"units", units},           {"examples", examples}};
}

GenerationResult generate_examples(const kg::KnowledgeGraph& kg, const kg::ExternalIdentifier& x,
                                   const kg::PropertyId& p, const std::vector<kg::Triple>& triples,
                                   const SnapshotLookup& snapshots, const GenerationOptions& options) {
  GenerationResult result;
  const std::vector<std::string> questions = formulate_questions(kg.property(p), options.question_sources);
  std::map<std::string, std::shared_ptr<const html::CleanDocument>> contexts;
  std::set<std::string> seen;
  for (const auto& t : triples) {
    ++result.stats.triples;
    require(t.property == p, ErrorCode::precondition, "triple property " + t.property.str() + " is not " + p.str());
    const kg::EntityRecord subject = kg.entity(t.subject);
    const auto xid = subject.external_ids.find(x.property);
    if (xid == subject.external_ids.end()) {
      ++result.stats.missing_snapshot;
      continue;
    }
    const std::string url = kg::resolve_formatter_url(x, xid->second);
    const std::string object_key = (t.object.is_item() ? "item:" : "value:") + t.object.value;
    if (!seen.insert(stable_id({t.subject.str(), p.str(), object_key, url})).second) {
      ++result.stats.duplicates;
      continue;
    }
    auto ctx = contexts.find(url);
    if (ctx == contexts.end()) {
      const auto snap = snapshots(url);
      std::shared_ptr<const html::CleanDocument> doc;
      if (snap && snap->ok()) {
        doc = std::make_shared<const html::CleanDocument>(
            html::normalize(snap->raw_html, options.tag_policy, {url, snap->content_type}));
      }
      ctx = contexts.emplace(url, doc).first;
    }
    if (!ctx->second) {
      ++result.stats.missing_snapshot;
      continue;
    }
    // Longest name first; ties in a fixed order.
    std::vector<std::string> names;
    for (const auto& n : kg.object_names(t.object)) names.push_back(n);
    std::stable_sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
      return text::code_point_count(a) > text::code_point_count(b);
    });
    std::vector<Answer> answers;
    for (const auto& n : names) {
      answers = find_mentions(*ctx->second, n);
      if (!answers.empty()) break;
    }
    if (answers.empty()) {
      ++result.stats.no_mention;
      continue;
    }
    ++result.stats.units;
    const std::string unit = stable_id({url, p.str(), object_key});
    for (std::size_t q = 0; q < questions.size(); ++q) {
      QAExample e;
      e.id = unit + "-q" + std::to_string(q);
      e.unit_id = unit;
      e.question = questions[q];
      e.context = ctx->second;
      e.answers = answers;
      e.source_triple = t;
      e.domain = x.property;
      e.url = url;
      result.examples.push_back(std::move(e));
    }
  }
  std::sort(result.examples.begin(), result.examples.end(),
            [](const QAExample& a, const QAExample& b) { return a.id < b.id; });
  result.stats.examples = result.examples.size();
  return result;
}

DatasetSplit split_dataset(const std::vector<QAExample>& examples, std::size_t train_units, std::size_t test_units,
                           std::uint64_t seed) {
  // group -> url -> unit -> examples
  std::map<GroupKey, std::map<std::string, std::map<std::string, std::vector<const QAExample*>>>> groups;
  for (const auto& e : examples) {
    groups[{e.domain.str(), e.source_triple.property.str()}][e.url][e.unit_id].push_back(&e);
  }
  DatasetSplit out;
  for (auto& [key, urls] : groups) {
    std::size_t units = 0;
    for (const auto& [url, us] : urls) units += us.size();
    if (units < train_units + test_units) {
      out.excluded[key] = units;
      continue;
    }
    std::vector<std::string> order;
    for (const auto& [url, us] : urls) order.push_back(url);
    seeded_shuffle(order, mix_seed(seed, key.str()));
    GroupSplit gs;
    gs.units = units;
    std::size_t n_test = 0;
    std::size_t n_train = 0;
    // Each URL goes wholly to one side: test first, then train. Units of a
    // URL that do not fit its side are discarded.
    for (const auto& url : order) {
      const bool to_test = n_test < test_units;
      const bool to_train = !to_test && n_train < train_units;
      for (const auto& [unit, exs] : urls[url]) {
        std::size_t& n = to_test ? n_test : n_train;
        const std::size_t cap = to_test ? test_units : train_units;
        if ((!to_test && !to_train) || n >= cap) {
          ++gs.discarded_units;
          continue;
        }
        auto& dst = to_test ? gs.test : gs.train;
        for (const QAExample* e : exs) {
          dst.push_back(*e);
          dst.back().split = to_test ? Split::test : Split::train;
        }
        ++n;
      }
    }
    if (n_test < test_units || n_train < train_units) {
      out.excluded[key] = units;
      continue;
    }
    out.groups[key] = std::move(gs);
  }
  return out;
}

const std::vector<std::size_t>& BudgetSpec::grid() {
  static const std::vector<std::size_t> g{0, 8, 16, 32, 64, 128, 256, 384, 500};
  return g;
}

void BudgetSpec::validate() const {
  require(std::is_sorted(budgets.begin(), budgets.end()) &&
              std::adjacent_find(budgets.begin(), budgets.end()) == budgets.end(),
          ErrorCode::config, "budgets must be strictly ascending");
  for (std::size_t b : budgets) {
    require(std::find(grid().begin(), grid().end(), b) != grid().end(), ErrorCode::config,
            "budget " + std::to_string(b) + " is not in the grid 0,8,16,32,64,128,256,384,500");
  }
}

BudgetSpec BudgetSpec::parse(std::string_view csv) {
  BudgetSpec spec;
  spec.budgets.clear();
  for (const auto& part : text::split(csv, ',')) {
    const std::string t = text::trim(part);
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(t, &used);
      require(used == t.size(), ErrorCode::config, "bad budget '" + t + "'");
      spec.budgets.push_back(v);
    } catch (const std::logic_error&) {
      fail(ErrorCode::config, "bad budget '" + t + "'");
    }
  }
  spec.validate();
  return spec;
}

std::map<std::size_t, std::vector<QAExample>> budget_subsets(const std::vector<QAExample>& train,
                                                             const BudgetSpec& spec, std::uint64_t seed,
                                                             const std::string& group_name) {
  spec.validate();
  std::map<std::string, std::vector<const QAExample*>> by_unit;
  for (const auto& e : train) by_unit[e.unit_id].push_back(&e);
  std::vector<std::string> order;
  for (const auto& [unit, exs] : by_unit) order.push_back(unit);
  seeded_shuffle(order, mix_seed(seed, "budget/" + group_name));
  std::map<std::size_t, std::vector<QAExample>> out;
  for (std::size_t k : spec.budgets) {
    require(k <= order.size(), ErrorCode::precondition,
            "budget " + std::to_string(k) + " exceeds the " + std::to_string(order.size()) +
                " training units of group " + (group_name.empty() ? std::string("<unnamed>") : group_name));
    auto& subset = out[k];
    for (std::size_t i = 0; i < k; ++i) {
      for (const QAExample* e : by_unit[order[i]]) subset.push_back(*e);
    }
    std::sort(subset.begin(), subset.end(), [](const QAExample& a, const QAExample& b) { return a.id < b.id; });
  }
  return out;
}

json example_to_json(const QAExample& e) {
  json answers = json::array();
  for (const auto& a : e.answers) answers.push_back({{"start", a.start}, {"end", a.end}, {"text", a.text}});
  return {{"id", e.id},
          {"unit_id", e.unit_id},
          {"question", e.question},
          {"context_ref", e.context ? e.context->source_hash() : ""},
          {"url", e.url},
          {"answers", std::move(answers)},
          {"source_triple", kg::to_json(e.source_triple)},
          {"domain", e.domain.str()},
          {"split", split_name(e.split)}};
}

json example_to_squad(const QAExample& e) {
  json texts = json::array();
  json starts = json::array();
  for (const auto& a : e.answers) {
    texts.push_back(a.text);
    starts.push_back(a.start);
  }
  return {{"id", e.id},
          {"question", e.question},
          {"context", e.context ? e.context->text() : ""},
          {"answers", {{"text", std::move(texts)}, {"answer_start", std::move(starts)}}}};
}

namespace {

void write_jsonl(const std::filesystem::path& path, const std::vector<QAExample>& exs, bool squad) {
  std::string body;
  for (const auto& e : exs) body += (squad ? example_to_squad(e) : example_to_json(e)).dump() + "\n";
  files::write_atomic(path, body);
}

}  // namespace

ExportSummary export_dataset(const std::filesystem::path& out, const DatasetSplit& split, const BudgetSpec& spec,
                             std::uint64_t seed, const std::map<GroupKey, GenerationStats>& stats) {
  namespace fs = std::filesystem;
  ExportSummary summary;
  fs::create_directories(out / "contexts");
  std::set<std::string> written;
  auto write_contexts = [&](const std::vector<QAExample>& exs) {
    for (const auto& e : exs) {
      if (!e.context || !written.insert(e.context->source_hash()).second) continue;
      files::write_atomic(out / "contexts" / (e.context->source_hash() + ".json"), e.context->to_json().dump() + "\n");
      ++summary.files;
    }
  };
  json groups = json::array();
  for (const auto& [key, gs] : split.groups) {
    const fs::path dir = out / key.domain / key.property;
    fs::create_directories(dir);
    auto write_pair = [&](const std::string& stem, const std::vector<QAExample>& exs) {
      write_jsonl(dir / (stem + ".jsonl"), exs, false);
      write_jsonl(dir / (stem + ".squad.jsonl"), exs, true);
      summary.files += 2;
    };
    write_pair("train", gs.train);
    write_pair("test", gs.test);
    write_contexts(gs.train);
    write_contexts(gs.test);
    json budgets = json::object();
    for (const auto& [k, subset] : budget_subsets(gs.train, spec, seed, key.str())) {
      write_pair("budget_" + std::to_string(k), subset);
      budgets[std::to_string(k)] = subset.size();
    }
    json g{{"domain", key.domain},
           {"property", key.property},
           {"units", gs.units},
           {"discarded_units", gs.discarded_units},
           {"train_examples", gs.train.size()},
           {"test_examples", gs.test.size()},
           {"budget_examples", std::move(budgets)}};
    if (auto it = stats.find(key); it != stats.end()) g["generation"] = it->second.to_json();
    groups.push_back(std::move(g));
  }
  json excluded = json::array();
  for (const auto& [key, units] : split.excluded) {
    json g{{"domain", key.domain}, {"property", key.property}, {"units", units}};
    if (auto it = stats.find(key); it != stats.end()) g["generation"] = it->second.to_json();
    excluded.push_back(std::move(g));
  }
  // Groups with no examples at all still report their drop counts.
  for (const auto& [key, st] : stats) {
    if (!split.groups.count(key) && !split.excluded.count(key)) {
      excluded.push_back({{"domain", key.domain}, {"property", key.property}, {"units", 0},
                          {"generation", st.to_json()}});
    }
  }
  summary.manifest = {{"version", 1},     {"seed", seed},         {"budgets", spec.budgets},
                      {"groups", groups}, {"excluded", excluded}};
  files::write_atomic(out / "manifest.json", summary.manifest.dump(2) + "\n");
  ++summary.files;
  return summary;
}

std::vector<QAExample> load_examples(const std::filesystem::path& jsonl, const std::filesystem::path& contexts_dir) {
  std::map<std::string, std::shared_ptr<const html::CleanDocument>> contexts;
  std::vector<QAExample> out;
  std::size_t line_no = 0;
  for (const auto& line : files::read_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      QAExample e;
      e.id = j.at("id").get<std::string>();
      e.unit_id = j.value("unit_id", "");
      e.question = j.at("question").get<std::string>();
      e.url = j.value("url", "");
      e.domain = kg::PropertyId(j.at("domain").get<std::string>());
      e.source_triple = kg::triple_from_json(j.at("source_triple"));
      e.split = parse_split(j.value("split", "none"));
      for (const auto& a : j.at("answers")) {
        e.answers.push_back({a.at("start").get<std::size_t>(), a.at("end").get<std::size_t>(),
                             a.at("text").get<std::string>()});
      }
      const std::string ref = j.at("context_ref").get<std::string>();
      auto it = contexts.find(ref);
      if (it == contexts.end()) {
        const auto path = contexts_dir / (ref + ".json");
        require(std::filesystem::exists(path), ErrorCode::upstream_missing,
                "context " + ref + " missing; re-run build-dataset");
        it = contexts
                 .emplace(ref, std::make_shared<const html::CleanDocument>(
                                   html::CleanDocument::from_json(json::parse(files::read_file(path)))))
                 .first;
      }
      e.context = it->second;
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      fail(ErrorCode::invalid, jsonl.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace wex::dataset
