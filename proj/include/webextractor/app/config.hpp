#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webextractor/crawl/snapshot.hpp"
#include "webextractor/dataset/dataset.hpp"
#include "webextractor/kg/graph.hpp"
#include "webextractor/kg/source.hpp"
#include "webextractor/linker/linker.hpp"
#include "webextractor/qa/backends.hpp"
#include "webextractor/qa/extractor.hpp"

namespace wex::app {

// (external identifier, property) pair the pipeline completes.
struct Target {
  kg::PropertyId domain;
  kg::PropertyId property;

  std::string str() const { return domain.str() + "/" + property.str(); }
  static Target parse(std::string_view s);  // "P434/P571"
  friend auto operator<=>(const Target&, const Target&) = default;
};

struct KgConfig {
  std::string source = "fixture";  // fixture | endpoint
  std::filesystem::path fixture;
  kg::EndpointOptions endpoint;
  kg::KgOptions options;
  std::size_t sample_size = 1000;
  kg::SortOrder sort_order = kg::SortOrder::descending;
};

struct CrawlConfig {
  std::string backend = "http";  // http | fixture | rendered
  std::filesystem::path fixture_index;
  std::string render_command;
  std::filesystem::path cache_dir;
  crawl::CrawlPolicy policy;
  std::size_t workers = 4;
  std::size_t max_pages_per_domain = 0;  // 0 = every entity carrying the identifier
};

struct DatasetConfig {
  dataset::QuestionSources question_sources = dataset::QuestionSources::labels_and_aliases;
  std::size_t train_units = 500;
  std::size_t test_units = 500;
  dataset::BudgetSpec budgets;
  std::filesystem::path out_dir;
};

struct PipelineConfig {
  std::vector<kg::PropertyId> domains;  // for select
  std::vector<Target> targets;          // empty: top_k per domain from the select report
  std::size_t top_k = 3;
};

struct ExtractorConfig {
  std::string backend = "rule";  // rule | remote
  std::filesystem::path rules;
  std::string endpoint = "http://127.0.0.1:8000";  // may contain {K} for experiment budgets
  qa::RemoteOptions remote;
  qa::QuestionMode question_mode = qa::QuestionMode::best_score;
  double min_score = 0.0;
};

struct LinkerConfig {
  std::size_t sample_size = 1000;
  linker::Hyperparameters hyper;
  bool exclude_test_subjects = true;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_dir;
  std::size_t snapshot_every = 256;
};

struct EstimateConfig {
  std::filesystem::path stats;
  std::filesystem::path out_dir;
};

struct ExperimentConfig {
  double pretrain_fraction = 0.8;
  std::filesystem::path out_dir;
};

struct Config {
  std::filesystem::path path;      // file it was read from
  std::filesystem::path work_dir;  // default "<config dir>/work"
  std::uint64_t seed = 7;
  KgConfig kg;
  CrawlConfig crawl;
  DatasetConfig dataset;
  PipelineConfig pipeline;
  ExtractorConfig extractor;
  LinkerConfig linker;
  ServiceConfig service;
  EstimateConfig estimate;
  ExperimentConfig experiment;

  // Relative paths resolve against the config file's directory. Unknown
  // keys and bad values are config errors. WEBEXTRACTOR_CACHE overrides
  // crawl.cache_dir.
  static Config load(const std::filesystem::path& path);
  static Config from_toml(std::string_view text, const std::filesystem::path& base_dir);

  // Effective values, echoed into run reports.
  nlohmann::json to_json() const;
};

}  // namespace wex::app
