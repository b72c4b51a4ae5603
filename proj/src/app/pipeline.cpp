#include "webextractor/app/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "webextractor/crawl/crawler.hpp"
#include "webextractor/crawl/fetcher.hpp"
#include "webextractor/dataset/dataset.hpp"
#include "webextractor/estimate/estimator.hpp"
#include "webextractor/html/normalizer.hpp"
#include "webextractor/linker/linker.hpp"
#include "webextractor/qa/backends.hpp"
#include "webextractor/qa/f1.hpp"
#include "webextractor/review/service.hpp"
#include "webextractor/review/store.hpp"
#include "webextractor/util/digest.hpp"
#include "webextractor/util/files.hpp"
#include "webextractor/util/text.hpp"

namespace wex::app {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return 2;
    case ErrorCode::upstream_missing: return 3;
    case ErrorCode::transport: return 4;
    default: return 1;
  }
}

namespace {

void require_artifact(const fs::path& path, const std::string& producer) {
  require(fs::exists(path), ErrorCode::upstream_missing,
          path.string() + " is missing; run `webextractor " + producer + "` first");
}

json read_json(const fs::path& path) {
  try {
    return json::parse(files::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::integrity, "cannot parse " + path.string() + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::size_t n = 0;
  for (const auto& line : files::read_lines(path)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      fail(ErrorCode::integrity, path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<json>& lines) {
  std::string body;
  for (const auto& l : lines) body += l.dump() + "\n";
  files::write_atomic(path, body);
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed, std::string_view salt) {
  std::mt19937_64 rng(seed ^ std::stoull(stable_id({salt}), nullptr, 16));
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

json range_json(const html::Range& r) { return json::array({r.first, r.second}); }

html::Range range_from(const json& j) { return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()}; }

std::string first_label(const kg::KnowledgeGraph& kg, const kg::PropertyId& p) {
  try {
    const auto info = kg.property(p);
    return info.labels.empty() ? std::string() : info.labels.front();
  } catch (const Error&) {
    return {};
  }
}

}  // namespace

Pipeline::Pipeline(Config config) : config_(std::move(config)) {}

const kg::KnowledgeGraph& Pipeline::kg() {
  if (!kg_) {
    std::shared_ptr<const kg::KgSource> source;
    if (config_.kg.source == "fixture") {
      require(fs::exists(config_.kg.fixture), ErrorCode::config,
              "kg fixture " + config_.kg.fixture.string() + " not found");
      source = kg::FixtureSource::load(config_.kg.fixture);
    } else {
      source = std::make_shared<kg::EndpointSource>(config_.kg.endpoint);
    }
    kg_ = std::make_unique<kg::KnowledgeGraph>(source, config_.kg.options);
  }
  return *kg_;
}

std::shared_ptr<crawl::SnapshotCache> Pipeline::cache() {
  if (!cache_) cache_ = std::make_shared<crawl::SnapshotCache>(config_.crawl.cache_dir);
  return cache_;
}

std::shared_ptr<qa::ExtractorBackend> Pipeline::extractor(std::optional<std::size_t> budget) {
  if (config_.extractor.backend == "rule") {
    if (!rule_backend_) {
      require(fs::exists(config_.extractor.rules), ErrorCode::config,
              "rule file " + config_.extractor.rules.string() + " not found");
      rule_backend_ = qa::RuleBackend::load(config_.extractor.rules);
    }
    return rule_backend_;
  }
  std::string endpoint = config_.extractor.endpoint;
  if (const auto at = endpoint.find("{K}"); at != std::string::npos) {
    require(budget.has_value(), ErrorCode::config,
            "extractor.endpoint contains {K}; it can only be used by `experiment`");
    endpoint.replace(at, 3, std::to_string(*budget));
  }
  return std::make_shared<qa::RemoteBackend>(endpoint, config_.extractor.remote);
}

json Pipeline::finish(const std::string& command, TimePoint started, json outputs, std::string summary) {
  json report{{"command", command},
              {"started_at", format_utc(started)},
              {"finished_at", format_utc(std::chrono::system_clock::now())},
              {"config", config_.to_json()},
              {"outputs", std::move(outputs)},
              {"summary", std::move(summary)}};
  files::write_atomic(report_path(command), report.dump(2) + "\n");
  return report;
}

// ---- select ----

json Pipeline::select() {
  const auto started = std::chrono::system_clock::now();
  const auto& g = kg();
  json domains = json::array();
  std::ostringstream summary;
  for (const auto& d : config_.pipeline.domains) {
    const kg::ExternalIdentifier x = g.external_identifier(d);
    const auto sample = kg::sample_entities_with_identifier(g, x, config_.kg.sample_size, config_.seed);
    const auto ranking = kg::rank_properties(sample, config_.kg.sort_order);
    json props = json::array();
    json suggested = json::array();
    for (const auto& u : ranking) {
      std::string datatype;
      try {
        datatype = g.property(u.property).datatype;
      } catch (const Error&) {
      }
      const std::size_t incomplete = kg::find_incomplete(x, u.property, sample).size();
      props.push_back({{"property", u.property.str()},
                       {"label", first_label(g, u.property)},
                       {"datatype", datatype},
                       {"usage", u.usage_count},
                       {"incomplete", incomplete}});
      if (suggested.size() < config_.pipeline.top_k && datatype != "external-id" && !datatype.empty()) {
        suggested.push_back(d.str() + "/" + u.property.str());
      }
    }
    summary << d.str() << " (" << first_label(g, d) << "): " << sample.size() << " sampled entities, "
            << ranking.size() << " properties";
    if (!ranking.empty()) summary << ", most used " << ranking.front().property.str();
    summary << "\n";
    domains.push_back({{"domain", d.str()},
                       {"formatter", x.formatter_template},
                       {"sample_size", sample.size()},
                       {"properties", std::move(props)},
                       {"suggested_targets", std::move(suggested)}});
  }
  const json selection{{"version", 1}, {"seed", config_.seed}, {"domains", domains}};
  files::write_atomic(selection_path(), selection.dump(2) + "\n");
  return finish("select", started, {{"selection", selection_path().string()}, {"domains", domains.size()}},
                summary.str());
}

std::vector<Target> Pipeline::targets() {
  if (!config_.pipeline.targets.empty()) return config_.pipeline.targets;
  require_artifact(selection_path(), "select");
  std::vector<Target> out;
  for (const auto& d : read_json(selection_path()).at("domains")) {
    for (const auto& t : d.at("suggested_targets")) out.push_back(Target::parse(t.get<std::string>()));
  }
  require(!out.empty(), ErrorCode::config, "the select report suggests no targets; set pipeline.targets");
  return out;
}

// ---- crawl ----

json Pipeline::crawl() {
  const auto started = std::chrono::system_clock::now();
  const auto& g = kg();
  std::shared_ptr<crawl::FetchBackend> backend;
  if (config_.crawl.backend == "fixture") {
    require(fs::exists(config_.crawl.fixture_index), ErrorCode::config,
            "page fixture index " + config_.crawl.fixture_index.string() + " not found");
    backend = crawl::FixtureBackend::load(config_.crawl.fixture_index);
  } else if (config_.crawl.backend == "rendered") {
    backend = std::make_shared<crawl::CommandBackend>(config_.crawl.render_command);
  } else {
    backend = std::make_shared<crawl::HttpBackend>();
  }
  crawl::Crawler crawler(backend, cache(), config_.crawl.policy);

  std::vector<PageRecord> records;
  for (const auto& d : config_.pipeline.domains) {
    const kg::ExternalIdentifier x = g.external_identifier(d);
    std::vector<kg::EntityId> subjects = g.source().entities_with_external_id(d);
    if (config_.crawl.max_pages_per_domain > 0 && subjects.size() > config_.crawl.max_pages_per_domain) {
      seeded_shuffle(subjects, config_.seed, "crawl/" + d.str());
      subjects.resize(config_.crawl.max_pages_per_domain);
      std::sort(subjects.begin(), subjects.end());
    }
    for (const auto& s : subjects) {
      const auto rec = g.entity(s);
      records.push_back({d.str(), s.str(), kg::resolve_formatter_url(x, rec.external_ids.at(d)), "", 0, "", ""});
    }
  }
  std::vector<std::string> urls;
  for (const auto& r : records) urls.push_back(r.url);
  const auto outcomes = crawler.fetch_many(urls, config_.crawl.workers);

  std::map<std::string, std::size_t> counts;
  std::vector<json> lines;
  for (std::size_t i = 0; i < records.size(); ++i) {
    PageRecord& r = records[i];
    const auto& o = outcomes[i];
    if (o.snapshot) {
      r.http_status = o.snapshot->http_status;
      r.content_hash = o.snapshot->content_hash;
      r.status = o.snapshot->ok() ? "ok" : "http_error";
    } else {
      r.status = o.error == ErrorCode::skipped ? "skipped" : "error";
      r.message = o.message;
    }
    ++counts[r.status];
    lines.push_back({{"domain", r.domain},
                     {"subject", r.subject},
                     {"url", r.url},
                     {"status", r.status},
                     {"http_status", r.http_status},
                     {"content_hash", r.content_hash},
                     {"message", r.message}});
  }
  write_jsonl(pages_path(), lines);
  json skipped = json::array();
  for (const auto& s : crawler.skipped()) skipped.push_back({{"domain", s.domain}, {"url", s.url}, {"reason", s.reason}});

  std::ostringstream summary;
  summary << records.size() << " pages: " << counts["ok"] << " ok, " << counts["http_error"] << " http errors, "
          << counts["skipped"] << " skipped, " << counts["error"] << " failed; " << crawler.network_requests()
          << " network requests\n";
  return finish("crawl", started,
                {{"pages", pages_path().string()},
                 {"counts", counts},
                 {"network_requests", crawler.network_requests()},
                 {"skipped_domains", skipped},
                 {"backend", backend->name()}},
                summary.str());
}

std::vector<PageRecord> Pipeline::pages() {
  require_artifact(pages_path(), "crawl");
  std::vector<PageRecord> out;
  for (const auto& j : read_jsonl(pages_path())) {
    out.push_back({j.at("domain").get<std::string>(), j.at("subject").get<std::string>(),
                   j.at("url").get<std::string>(), j.at("status").get<std::string>(), j.at("http_status").get<int>(),
                   j.at("content_hash").get<std::string>(), j.value("message", std::string())});
  }
  return out;
}

// ---- build-dataset ----

json Pipeline::build_dataset() {
  const auto started = std::chrono::system_clock::now();
  const auto& g = kg();
  const auto crawled = pages();
  auto store = cache();
  const dataset::SnapshotLookup lookup = [store](const std::string& url) { return store->lookup(url); };
  dataset::GenerationOptions options;
  options.question_sources = config_.dataset.question_sources;

  std::vector<dataset::QAExample> all;
  std::map<dataset::GroupKey, dataset::GenerationStats> stats;
  for (const auto& t : targets()) {
    const kg::ExternalIdentifier x = g.external_identifier(t.domain);
    std::vector<kg::Triple> triples;
    for (const auto& page : crawled) {
      if (page.domain != t.domain.str() || page.status != "ok") continue;
      const auto rec = g.entity(kg::EntityId(page.subject));
      if (auto it = rec.claims.find(t.property); it != rec.claims.end()) {
        for (const auto& o : it->second) triples.push_back({rec.id, t.property, o});
      }
    }
    auto result = dataset::generate_examples(g, x, t.property, triples, lookup, options);
    stats[{t.domain.str(), t.property.str()}] = result.stats;
    std::move(result.examples.begin(), result.examples.end(), std::back_inserter(all));
  }
  const auto split =
      dataset::split_dataset(all, config_.dataset.train_units, config_.dataset.test_units, config_.seed);
  const auto exported = dataset::export_dataset(config_.dataset.out_dir, split, config_.dataset.budgets, config_.seed,
                                                stats);
  std::ostringstream summary;
  summary << all.size() << " examples; " << split.groups.size() << " groups exported, " << split.excluded.size()
          << " excluded for too few units\n";
  for (const auto& [key, gs] : split.groups) {
    summary << "  " << key.str() << ": " << gs.train.size() << " train / " << gs.test.size() << " test examples\n";
  }
  return finish("build-dataset", started,
                {{"dataset_dir", config_.dataset.out_dir.string()},
                 {"examples", all.size()},
                 {"files", exported.files},
                 {"manifest", exported.manifest}},
                summary.str());
}

// ---- extract ----

json Pipeline::extract() {
  const auto started = std::chrono::system_clock::now();
  const auto& g = kg();
  const auto crawled = pages();
  auto backend = extractor();
  const html::TagPolicy policy;

  std::vector<json> lines;
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& t : targets()) {
    auto& c = counts[t.str()];
    const auto questions = dataset::formulate_questions(g.property(t.property), config_.dataset.question_sources);
    for (const auto& page : crawled) {
      if (page.domain != t.domain.str()) continue;
      const auto rec = g.entity(kg::EntityId(page.subject));
      if (rec.has_claim(t.property)) continue;
      ++c["incomplete"];
      if (page.status != "ok") {
        ++c["no_page"];
        continue;
      }
      const auto snap = cache()->lookup(page.url);
      if (!snap || !snap->ok()) {
        ++c["no_page"];
        continue;
      }
      auto doc = std::make_shared<const html::CleanDocument>(
          html::normalize(snap->raw_html, policy, {page.url, snap->content_type}));
      const std::string id = page.subject + "/" + t.property.str();
      const auto pred = qa::predict_with_questions(id, questions, doc, *backend, config_.extractor.question_mode);
      if (pred.empty() || pred.score < config_.extractor.min_score) {
        ++c["no_answer"];
        continue;
      }
      const auto projected = html::project_span(*doc, snap->raw_html, {pred.start, pred.end});
      ++c["extracted"];
      lines.push_back({{"id", stable_id({page.subject, t.property.str(), page.url})},
                       {"domain", t.domain.str()},
                       {"subject", page.subject},
                       {"property", t.property.str()},
                       {"url", page.url},
                       {"snapshot_hash", snap->content_hash},
                       {"retrieved_at", format_utc(snap->fetched_at)},
                       {"clean_span", range_json({pred.start, pred.end})},
                       {"raw_byte_range", range_json(projected.raw)},
                       {"text", pred.text},
                       {"score", pred.score},
                       {"backend", backend->descriptor()}});
    }
  }
  std::sort(lines.begin(), lines.end(), [](const json& a, const json& b) {
    return std::tie(a.at("domain").get_ref<const std::string&>(), a.at("property").get_ref<const std::string&>(),
                    a.at("subject").get_ref<const std::string&>()) <
           std::tie(b.at("domain").get_ref<const std::string&>(), b.at("property").get_ref<const std::string&>(),
                    b.at("subject").get_ref<const std::string&>());
  });
  write_jsonl(extractions_path(), lines);
  std::ostringstream summary;
  summary << lines.size() << " extractions with " << backend->descriptor() << "\n";
  for (auto& [target, c] : counts) {
    summary << "  " << target << ": " << c["incomplete"] << " incomplete entities, " << c["extracted"]
            << " extracted, " << c["no_answer"] << " without an answer, " << c["no_page"] << " without a page\n";
  }
  return finish("extract", started,
                {{"extractions", extractions_path().string()}, {"count", lines.size()}, {"per_target", counts}},
                summary.str());
}

// ---- train-linker ----

namespace {

std::set<kg::EntityId> test_subjects(const fs::path& dataset_dir, const kg::PropertyId& p) {
  std::set<kg::EntityId> out;
  const fs::path manifest = dataset_dir / "manifest.json";
  if (!fs::exists(manifest)) return out;
  for (const auto& g : read_json(manifest).at("groups")) {
    if (g.at("property").get<std::string>() != p.str()) continue;
    const fs::path test = dataset_dir / g.at("domain").get<std::string>() / p.str() / "test.jsonl";
    if (!fs::exists(test)) continue;
    for (const auto& line : read_jsonl(test)) {
      out.insert(kg::EntityId(line.at("source_triple").at("subject").get<std::string>()));
    }
  }
  return out;
}

}  // namespace

json Pipeline::train_linker() {
  const auto started = std::chrono::system_clock::now();
  const auto& g = kg();
  std::set<kg::PropertyId> properties;
  for (const auto& t : targets()) {
    if (g.property(t.property).is_item_valued()) properties.insert(t.property);
  }
  json models = json::array();
  std::ostringstream summary;
  for (const auto& p : properties) {
    const auto exclude = config_.linker.exclude_test_subjects ? test_subjects(config_.dataset.out_dir, p)
                                                              : std::set<kg::EntityId>{};
    const auto training = linker::build_training(p, g, config_.linker.sample_size, config_.seed, exclude);
    const auto objective = linker::make_objective(training, g, config_.linker.hyper.l2);
    linker::RankingModel model;
    bool trivial = false;
    if (objective.pairs() == 0) {
      // Nothing to disambiguate in the sample: a zero model ranks by id.
      trivial = true;
      model.property = p;
      model.space = training.space;
      model.weights.assign(training.space.dimension(), 0.0);
      model.meta.seed = config_.seed;
      model.meta.hyper = config_.linker.hyper;
      model.meta.instances = training.instances.size();
    } else {
      model = linker::train_ranker(training, g, config_.linker.hyper, config_.seed);
    }
    files::write_atomic(model_path(p), model.to_json().dump(2) + "\n");
    models.push_back({{"property", p.str()},
                      {"path", model_path(p).string()},
                      {"instances", training.instances.size()},
                      {"pairs", objective.pairs()},
                      {"excluded_subjects", exclude.size()},
                      {"epochs", model.meta.epochs},
                      {"final_loss", model.meta.loss_curve.empty() ? 0.0 : model.meta.loss_curve.back()},
                      {"trivial", trivial}});
    summary << p.str() << ": " << training.instances.size() << " instances, " << objective.pairs() << " pairs"
            << (trivial ? " (no confusables, zero model)" : ", " + std::to_string(model.meta.epochs) + " epochs")
            << "\n";
  }
  if (properties.empty()) summary << "no item-valued target properties; nothing to train\n";
  return finish("train-linker", started, {{"models", models}}, summary.str());
}

// ---- link ----

json Pipeline::link() {
  const auto started = std::chrono::system_clock::now();
  const auto& g = kg();
  require_artifact(extractions_path(), "extract");
  std::map<kg::PropertyId, linker::RankingModel> models;
  std::vector<review::FactProposal> proposals;
  std::map<std::string, std::size_t> kinds;
  for (const auto& e : read_jsonl(extractions_path())) {
    const kg::PropertyId p(e.at("property").get<std::string>());
    const std::string text = e.at("text").get<std::string>();
    review::FactProposal fp;
    fp.subject = kg::EntityId(e.at("subject").get<std::string>());
    fp.property = p;
    fp.domain = e.at("domain").get<std::string>();
    fp.evidence.source_url = e.at("url").get<std::string>();
    fp.evidence.raw_byte_range = range_from(e.at("raw_byte_range"));
    fp.evidence.clean_span = range_from(e.at("clean_span"));
    fp.evidence.span_text = text;
    fp.evidence.snapshot_hash = e.at("snapshot_hash").get<std::string>();
    fp.evidence.retrieved_at = e.at("retrieved_at").get<std::string>();
    fp.extraction_score = e.at("score").get<double>();
    if (g.property(p).is_item_valued()) {
      auto it = models.find(p);
      if (it == models.end()) {
        require_artifact(model_path(p), "train-linker");
        it = models.emplace(p, linker::RankingModel::from_json(read_json(model_path(p)))).first;
      }
      const auto ranked = linker::link(text, p, it->second, g);
      if (ranked.empty()) {
        fp.object = review::ProposalObject::unlinked(text);
      } else {
        fp.object = review::ProposalObject::item(ranked.front().entity);
        fp.linking_score = ranked.front().score;
      }
    } else {
      fp.object = review::ProposalObject::literal(text);
    }
    ++kinds[std::string(review::object_kind_name(fp.object.kind))];
    fp.id = review::proposal_id(fp);
    proposals.push_back(std::move(fp));
  }
  review::ProposalStore store(config_.service.store_dir, {}, {config_.service.snapshot_every, true});
  const auto result = store.submit(proposals);
  store.checkpoint();
  std::ostringstream summary;
  summary << proposals.size() << " proposals (" << kinds["item"] << " linked, " << kinds["literal"] << " literal, "
          << kinds["unlinked"] << " unlinked); " << result.accepted << " new, " << result.duplicates.size()
          << " already stored, " << result.rejected.size() << " rejected\n";
  return finish("link", started,
                {{"store", config_.service.store_dir.string()},
                 {"proposals", proposals.size()},
                 {"object_kinds", kinds},
                 {"submit", result.to_json()}},
                summary.str());
}

// ---- estimate ----

json Pipeline::estimate(const std::optional<fs::path>& stats_path) {
  const auto started = std::chrono::system_clock::now();
  const fs::path path = stats_path.value_or(config_.estimate.stats);
  require(!path.empty(), ErrorCode::config, "no stats file: set estimate.stats or pass --stats");
  require(fs::exists(path), ErrorCode::config, "stats file " + path.string() + " not found");
  const auto agg = estimate::aggregate(estimate::read_stats_csv(path));
  files::write_atomic(config_.estimate.out_dir / "totals.json", agg.to_json().dump(2) + "\n");
  files::write_atomic(config_.estimate.out_dir / "totals.csv", agg.to_csv());
  std::ostringstream summary;
  for (const auto& r : agg.rows) {
    summary << r.stats.domain << "-" << r.stats.property << ": " << estimate::format_count(r.stats.links) << " x "
            << r.stats.freq.str() << " x " << r.stats.acc.str() << " = " << estimate::format_count(r.estimate)
            << "\n";
  }
  summary << "total: " << estimate::format_count(agg.total) << "\n";
  return finish("estimate", started,
                {{"totals_json", (config_.estimate.out_dir / "totals.json").string()},
                 {"totals_csv", (config_.estimate.out_dir / "totals.csv").string()},
                 {"total", agg.total},
                 {"rows", agg.to_json().at("rows")}},
                summary.str());
}

// ---- experiment ----

json Pipeline::experiment(const std::optional<dataset::BudgetSpec>& budget_override) {
  const auto started = std::chrono::system_clock::now();
  const auto& g = kg();
  const fs::path dir = config_.dataset.out_dir;
  require_artifact(dir / "manifest.json", "build-dataset");
  const json manifest = read_json(dir / "manifest.json");
  const dataset::BudgetSpec spec = budget_override.value_or(config_.dataset.budgets);
  spec.validate();
  const auto built = manifest.at("budgets").get<std::vector<std::size_t>>();
  for (std::size_t k : spec.budgets) {
    require(std::find(built.begin(), built.end(), k) != built.end(), ErrorCode::config,
            "budget " + std::to_string(k) + " was not built; add it to dataset.budgets and rerun build-dataset");
  }

  json f1_rows = json::array();
  json hit_rows = json::array();
  std::set<std::string> domains;
  std::ostringstream summary;
  for (const auto& group : manifest.at("groups")) {
    const std::string domain = group.at("domain").get<std::string>();
    const kg::PropertyId p(group.at("property").get<std::string>());
    domains.insert(domain);
    const auto test = dataset::load_examples(dir / domain / p.str() / "test.jsonl", dir / "contexts");
    std::vector<qa::ExtractionQuery> queries;
    for (const auto& e : test) queries.push_back({e.id, e.question, e.context});
    for (std::size_t k : spec.budgets) {
      auto backend = extractor(k);
      const auto preds = qa::extract_all(queries, *backend);
      const auto report = qa::evaluate_f1(preds, test);
      f1_rows.push_back({{"domain", domain},
                         {"property", p.str()},
                         {"budget", k},
                         {"f1", report.mean},
                         {"examples", report.count},
                         {"backend", backend->descriptor()}});
      summary << domain << "/" << p.str() << " K=" << k << ": F1 " << report.mean << " over " << report.count
              << " test examples\n";
    }
    if (g.property(p).is_item_valued() && fs::exists(model_path(p))) {
      const auto model = linker::RankingModel::from_json(read_json(model_path(p)));
      std::vector<std::vector<kg::EntityId>> ranked;
      std::vector<kg::EntityId> golds;
      std::set<std::string> units;
      for (const auto& e : test) {
        if (!units.insert(e.unit_id).second || !e.source_triple.object.is_item() || e.answers.empty()) continue;
        std::vector<kg::EntityId> ids;
        for (const auto& s : linker::link(e.answers.front().text, p, model, g)) ids.push_back(s.entity);
        ranked.push_back(std::move(ids));
        golds.push_back(e.source_triple.object.as_item());
      }
      const double hit = linker::evaluate_hit1(ranked, golds);
      hit_rows.push_back({{"domain", domain}, {"property", p.str()}, {"hit_at_1", hit}, {"cases", golds.size()}});
      summary << domain << "/" << p.str() << ": Hit@1 " << hit << " over " << golds.size() << " linked facts\n";
    }
  }

  std::vector<std::string> order(domains.begin(), domains.end());
  seeded_shuffle(order, config_.seed, "experiment/partition");
  std::size_t n_pre = order.size();
  if (order.size() >= 2) {
    const auto want = static_cast<std::size_t>(std::lround(config_.experiment.pretrain_fraction * order.size()));
    n_pre = std::clamp<std::size_t>(want, 1, order.size() - 1);
  }
  std::vector<std::string> pre(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_pre));
  std::vector<std::string> hold(order.begin() + static_cast<std::ptrdiff_t>(n_pre), order.end());
  std::sort(pre.begin(), pre.end());
  std::sort(hold.begin(), hold.end());
  const json partition{{"seed", config_.seed},
                       {"pretrain_fraction", config_.experiment.pretrain_fraction},
                       {"pretrain", pre},
                       {"holdout", hold}};
  files::write_atomic(config_.experiment.out_dir / "partition.json", partition.dump(2) + "\n");
  const json results{{"f1", f1_rows}, {"hit_at_1", hit_rows}, {"partition", partition}};
  files::write_atomic(config_.experiment.out_dir / "results.json", results.dump(2) + "\n");
  summary << "domain partition: " << pre.size() << " pretrain / " << hold.size() << " held out\n";
  return finish("experiment", started,
                {{"results", (config_.experiment.out_dir / "results.json").string()},
                 {"f1", f1_rows},
                 {"hit_at_1", hit_rows},
                 {"partition", partition}},
                summary.str());
}

// ---- serve ----

void Pipeline::serve(std::optional<int> port) {
  auto store = std::make_shared<review::ProposalStore>(
      config_.service.store_dir, review::ProposalStore::Clock{},
      review::StoreOptions{config_.service.snapshot_every, true});
  review::ProposalService service(store);
  service.listen(config_.service.host, port.value_or(config_.service.port));
}

}  // namespace wex::app
