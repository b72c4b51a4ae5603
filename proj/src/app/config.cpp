#include "webextractor/app/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "webextractor/app/toml.hpp"
#include "webextractor/error.hpp"
#include "webextractor/util/files.hpp"

namespace wex::app {

using nlohmann::json;

Target Target::parse(std::string_view s) {
  const auto slash = s.find('/');
  require(slash != std::string_view::npos, ErrorCode::config,
          "target '" + std::string(s) + "' must look like DOMAIN/PROPERTY, e.g. P434/P571");
  try {
    return {kg::PropertyId(std::string(s.substr(0, slash))), kg::PropertyId(std::string(s.substr(slash + 1)))};
  } catch (const Error& e) {
    fail(ErrorCode::config, "target '" + std::string(s) + "': " + e.what());
  }
}

namespace {

// Typed reads from one table; leftover keys are reported as unknown.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (root.contains(name_)) {
      table_ = root.at(name_);
      require(table_.is_object(), ErrorCode::config, "[" + name_ + "] must be a table");
    } else {
      table_ = json::object();
    }
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!table_.contains(key)) return fallback;
    try {
      return table_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorCode::config, where(key) + " has the wrong type");
    }
  }

  std::size_t size(const std::string& key, std::size_t fallback) {
    const std::int64_t v = get<std::int64_t>(key, static_cast<std::int64_t>(fallback));
    require(v >= 0, ErrorCode::config, where(key) + " must be >= 0");
    return static_cast<std::size_t>(v);
  }

  std::filesystem::path path(const std::string& key, const std::filesystem::path& base,
                             const std::filesystem::path& fallback) {
    const std::string v = get<std::string>(key, std::string());
    if (v.empty()) return fallback;
    const std::filesystem::path p(v);
    return p.is_absolute() ? p : (base / p).lexically_normal();
  }

  bool has(const std::string& key) const { return table_.contains(key); }

  void finish() const {
    for (const auto& [key, value] : table_.items()) {
      require(seen_.count(key) > 0, ErrorCode::config, "unknown key " + where(key));
    }
  }

  std::string where(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

 private:
  std::string name_;
  json table_;
  std::set<std::string> seen_;
};

template <typename F>
auto config_value(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(ErrorCode::config, what + ": " + e.what());
  }
}

}  // namespace

Config Config::from_toml(std::string_view text, const std::filesystem::path& base_dir) {
  const json root = parse_toml(text);
  static const std::set<std::string> sections{"kg",     "crawl",   "dataset",  "pipeline",  "extractor",
                                              "linker", "service", "estimate", "experiment"};
  Config c;
  const std::filesystem::path base = base_dir.empty() ? std::filesystem::current_path() : base_dir;

  std::set<std::string> top_keys;
  for (const auto& [key, value] : root.items()) {
    if (!sections.count(key)) top_keys.insert(key);
  }
  for (const auto& key : top_keys) {
    require(key == "work_dir" || key == "seed", ErrorCode::config, "unknown key " + key);
  }
  if (root.contains("work_dir")) {
    require(root.at("work_dir").is_string(), ErrorCode::config, "work_dir must be a string");
    const std::filesystem::path p(root.at("work_dir").get<std::string>());
    c.work_dir = p.is_absolute() ? p : (base / p).lexically_normal();
  } else {
    c.work_dir = base / "work";
  }
  if (root.contains("seed")) {
    require(root.at("seed").is_number_integer() && root.at("seed").get<std::int64_t>() >= 0, ErrorCode::config,
            "seed must be a non-negative integer");
    c.seed = root.at("seed").get<std::uint64_t>();
  }

  {
    Section s(root, "kg");
    c.kg.source = s.get<std::string>("source", c.kg.source);
    require(c.kg.source == "fixture" || c.kg.source == "endpoint", ErrorCode::config,
            "kg.source must be fixture or endpoint");
    c.kg.fixture = s.path("fixture", base, {});
    require(c.kg.source != "fixture" || !c.kg.fixture.empty(), ErrorCode::config,
            "kg.fixture is required when kg.source = \"fixture\"");
    c.kg.endpoint.sparql_url = s.get<std::string>("sparql_url", c.kg.endpoint.sparql_url);
    c.kg.endpoint.entity_data_url = s.get<std::string>("entity_data_url", c.kg.endpoint.entity_data_url);
    c.kg.endpoint.timeout = std::chrono::milliseconds(s.size("timeout_ms", c.kg.endpoint.timeout.count()));
    c.kg.endpoint.user_agent = s.get<std::string>("user_agent", c.kg.endpoint.user_agent);
    c.kg.options.languages = s.get<std::vector<std::string>>("languages", c.kg.options.languages);
    require(!c.kg.options.languages.empty(), ErrorCode::config, "kg.languages must not be empty");
    c.kg.sample_size = s.size("sample_size", c.kg.sample_size);
    require(c.kg.sample_size >= 1, ErrorCode::config, "kg.sample_size must be >= 1");
    const std::string order = s.get<std::string>("sort_order", "descending");
    require(order == "descending" || order == "ascending", ErrorCode::config,
            "kg.sort_order must be descending or ascending");
    c.kg.sort_order = order == "ascending" ? kg::SortOrder::ascending : kg::SortOrder::descending;
    s.finish();
  }
  {
    Section s(root, "crawl");
    c.crawl.backend = s.get<std::string>("backend", c.crawl.backend);
    require(c.crawl.backend == "http" || c.crawl.backend == "fixture" || c.crawl.backend == "rendered",
            ErrorCode::config, "crawl.backend must be http, fixture or rendered");
    c.crawl.fixture_index = s.path("fixture_index", base, {});
    require(c.crawl.backend != "fixture" || !c.crawl.fixture_index.empty(), ErrorCode::config,
            "crawl.fixture_index is required when crawl.backend = \"fixture\"");
    c.crawl.render_command = s.get<std::string>("render_command", "");
    require(c.crawl.backend != "rendered" || !c.crawl.render_command.empty(), ErrorCode::config,
            "crawl.render_command is required when crawl.backend = \"rendered\"");
    c.crawl.cache_dir = s.path("cache_dir", base, c.work_dir / "cache");
    if (const char* env = std::getenv("WEBEXTRACTOR_CACHE"); env && *env) c.crawl.cache_dir = env;
    auto& p = c.crawl.policy;
    p.per_domain_delay = std::chrono::milliseconds(s.size("delay_ms", p.per_domain_delay.count()));
    p.timeout = std::chrono::milliseconds(s.size("timeout_ms", p.timeout.count()));
    p.max_retries = static_cast<int>(s.size("retries", static_cast<std::size_t>(p.max_retries)));
    p.user_agent = s.get<std::string>("user_agent", p.user_agent);
    for (const auto& d : s.get<std::vector<std::string>>("blocked_domains", {})) p.blocked_domains.insert(d);
    p.honor_robots = s.get<bool>("honor_robots", p.honor_robots);
    for (const auto& d : s.get<std::vector<std::string>>("robots_overrides", {})) p.robots_overrides.insert(d);
    p.cache_ttl = std::chrono::hours(24 * s.size("cache_ttl_days", 30));
    c.crawl.workers = s.size("workers", c.crawl.workers);
    require(c.crawl.workers >= 1, ErrorCode::config, "crawl.workers must be >= 1");
    c.crawl.max_pages_per_domain = s.size("max_pages_per_domain", 0);
    p.validate();
    s.finish();
  }
  {
    Section s(root, "dataset");
    c.dataset.question_sources = config_value("dataset.question_sources", [&] {
      return dataset::parse_question_sources(s.get<std::string>("question_sources", "labels+aliases"));
    });
    c.dataset.train_units = s.size("train_units", c.dataset.train_units);
    c.dataset.test_units = s.size("test_units", c.dataset.test_units);
    if (s.has("budgets")) c.dataset.budgets.budgets = s.get<std::vector<std::size_t>>("budgets", {});
    config_value("dataset.budgets", [&] {
      c.dataset.budgets.validate();
      return 0;
    });
    require(c.dataset.budgets.budgets.empty() || c.dataset.budgets.budgets.back() <= c.dataset.train_units,
            ErrorCode::config, "dataset.budgets may not exceed dataset.train_units");
    c.dataset.out_dir = s.path("out_dir", base, c.work_dir / "dataset");
    s.finish();
  }
  {
    Section s(root, "pipeline");
    for (const auto& d : s.get<std::vector<std::string>>("domains", {})) {
      c.pipeline.domains.push_back(config_value("pipeline.domains", [&] { return kg::PropertyId(d); }));
    }
    for (const auto& t : s.get<std::vector<std::string>>("targets", {})) c.pipeline.targets.push_back(Target::parse(t));
    c.pipeline.top_k = s.size("top_k", c.pipeline.top_k);
    for (const auto& t : c.pipeline.targets) {
      if (std::find(c.pipeline.domains.begin(), c.pipeline.domains.end(), t.domain) == c.pipeline.domains.end()) {
        c.pipeline.domains.push_back(t.domain);
      }
    }
    require(!c.pipeline.domains.empty(), ErrorCode::config, "pipeline.domains or pipeline.targets must be set");
    s.finish();
  }
  {
    Section s(root, "extractor");
    c.extractor.backend = s.get<std::string>("backend", c.extractor.backend);
    require(c.extractor.backend == "rule" || c.extractor.backend == "remote", ErrorCode::config,
            "extractor.backend must be rule or remote");
    c.extractor.rules = s.path("rules", base, {});
    require(c.extractor.backend != "rule" || !c.extractor.rules.empty(), ErrorCode::config,
            "extractor.rules is required when extractor.backend = \"rule\"");
    c.extractor.endpoint = s.get<std::string>("endpoint", c.extractor.endpoint);
    c.extractor.remote.batch_size = s.size("batch_size", c.extractor.remote.batch_size);
    require(c.extractor.remote.batch_size >= 1, ErrorCode::config, "extractor.batch_size must be >= 1");
    c.extractor.remote.timeout = std::chrono::milliseconds(s.size("timeout_ms", c.extractor.remote.timeout.count()));
    c.extractor.question_mode = config_value("extractor.question_mode", [&] {
      return qa::parse_question_mode(s.get<std::string>("question_mode", "best_score"));
    });
    c.extractor.min_score = s.get<double>("min_score", c.extractor.min_score);
    require(c.extractor.min_score >= 0.0 && c.extractor.min_score <= 1.0, ErrorCode::config,
            "extractor.min_score must lie in [0, 1]");
    s.finish();
  }
  {
    Section s(root, "linker");
    c.linker.sample_size = s.size("sample_size", c.linker.sample_size);
    require(c.linker.sample_size >= 1, ErrorCode::config, "linker.sample_size must be >= 1");
    auto& h = c.linker.hyper;
    h.l2 = s.get<double>("l2", h.l2);
    h.step = s.get<double>("step", h.step);
    h.max_epochs = static_cast<int>(s.size("max_epochs", static_cast<std::size_t>(h.max_epochs)));
    h.tolerance = s.get<double>("tolerance", h.tolerance);
    require(h.l2 >= 0 && h.step > 0 && h.tolerance >= 0, ErrorCode::config,
            "linker hyperparameters need l2 >= 0, step > 0, tolerance >= 0");
    c.linker.exclude_test_subjects = s.get<bool>("exclude_test_subjects", c.linker.exclude_test_subjects);
    s.finish();
  }
  {
    Section s(root, "service");
    c.service.host = s.get<std::string>("host", c.service.host);
    c.service.port = static_cast<int>(s.size("port", static_cast<std::size_t>(c.service.port)));
    require(c.service.port <= 65535, ErrorCode::config, "service.port out of range");
    c.service.store_dir = s.path("store_dir", base, c.work_dir / "proposals");
    c.service.snapshot_every = s.size("snapshot_every", c.service.snapshot_every);
    s.finish();
  }
  {
    Section s(root, "estimate");
    c.estimate.stats = s.path("stats", base, {});
    c.estimate.out_dir = s.path("out_dir", base, c.work_dir / "estimate");
    s.finish();
  }
  {
    Section s(root, "experiment");
    c.experiment.pretrain_fraction = s.get<double>("pretrain_fraction", c.experiment.pretrain_fraction);
    require(c.experiment.pretrain_fraction > 0.0 && c.experiment.pretrain_fraction < 1.0, ErrorCode::config,
            "experiment.pretrain_fraction must lie in (0, 1)");
    c.experiment.out_dir = s.path("out_dir", base, c.work_dir / "experiment");
    s.finish();
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorCode::config, "config file " + path.string() + " not found");
  Config c = from_toml(files::read_file(path), std::filesystem::absolute(path).parent_path());
  c.path = path;
  return c;
}

json Config::to_json() const {
  json targets = json::array();
  for (const auto& t : pipeline.targets) targets.push_back(t.str());
  json domains = json::array();
  for (const auto& d : pipeline.domains) domains.push_back(d.str());
  const auto& p = crawl.policy;
  return {
      {"config_file", path.string()},
      {"work_dir", work_dir.string()},
      {"seed", seed},
      {"kg",
       {{"source", kg.source},
        {"fixture", kg.fixture.string()},
        {"sparql_url", kg.endpoint.sparql_url},
        {"languages", kg.options.languages},
        {"sample_size", kg.sample_size},
        {"sort_order", kg.sort_order == kg::SortOrder::descending ? "descending" : "ascending"}}},
      {"crawl",
       {{"backend", crawl.backend},
        {"fixture_index", crawl.fixture_index.string()},
        {"cache_dir", crawl.cache_dir.string()},
        {"delay_ms", p.per_domain_delay.count()},
        {"timeout_ms", p.timeout.count()},
        {"retries", p.max_retries},
        {"user_agent", p.user_agent},
        {"blocked_domains", p.blocked_domains},
        {"honor_robots", p.honor_robots},
        {"robots_overrides", p.robots_overrides},
        {"cache_ttl_days", std::chrono::duration_cast<std::chrono::hours>(p.cache_ttl).count() / 24},
        {"workers", crawl.workers},
        {"max_pages_per_domain", crawl.max_pages_per_domain}}},
      {"dataset",
       {{"question_sources",
         dataset.question_sources == dataset::QuestionSources::labels ? "labels" : "labels+aliases"},
        {"train_units", dataset.train_units},
        {"test_units", dataset.test_units},
        {"budgets", dataset.budgets.budgets},
        {"out_dir", dataset.out_dir.string()}}},
      {"pipeline", {{"domains", domains}, {"targets", targets}, {"top_k", pipeline.top_k}}},
      {"extractor",
       {{"backend", extractor.backend},
        {"rules", extractor.rules.string()},
        {"endpoint", extractor.endpoint},
        {"batch_size", extractor.remote.batch_size},
        {"question_mode", extractor.question_mode == qa::QuestionMode::best_score ? "best_score" : "first_question"},
        {"min_score", extractor.min_score}}},
      {"linker",
       {{"sample_size", linker.sample_size},
        {"hyperparameters", linker.hyper.to_json()},
        {"exclude_test_subjects", linker.exclude_test_subjects}}},
      {"service",
       {{"host", service.host},
        {"port", service.port},
        {"store_dir", service.store_dir.string()},
        {"snapshot_every", service.snapshot_every}}},
      {"estimate", {{"stats", estimate.stats.string()}, {"out_dir", estimate.out_dir.string()}}},
      {"experiment", {{"pretrain_fraction", experiment.pretrain_fraction}, {"out_dir", experiment.out_dir.string()}}},
  };
}

}  // namespace wex::app
