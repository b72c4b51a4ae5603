#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webextractor/app/config.hpp"
#include "webextractor/crawl/cache.hpp"
#include "webextractor/error.hpp"
#include "webextractor/kg/graph.hpp"
#include "webextractor/qa/extractor.hpp"

namespace wex::app {

// 0 success, 2 config, 3 missing upstream artifact, 4 transport, 1 anything else.
int exit_code_for(ErrorCode code);

// One crawled page as recorded in pages.jsonl.
struct PageRecord {
  std::string domain;
  std::string subject;
  std::string url;
  std::string status;  // ok | http_error | skipped | error
  int http_status = 0;
  std::string content_hash;
  std::string message;
};

// The pipeline stages. Each command reads the artifacts of the stage before
// it from the work directory, writes its own, and returns a run report that
// is also saved as <work>/reports/<command>.json. Missing inputs raise
// upstream_missing naming the command that produces them.
class Pipeline {
 public:
  explicit Pipeline(Config config);

  nlohmann::json select();
  nlohmann::json crawl();
  nlohmann::json build_dataset();
  nlohmann::json extract();
  nlohmann::json train_linker();
  nlohmann::json link();
  nlohmann::json estimate(const std::optional<std::filesystem::path>& stats = std::nullopt);
  nlohmann::json experiment(const std::optional<dataset::BudgetSpec>& budgets = std::nullopt);
  // Serves the proposal store until the process is stopped.
  void serve(std::optional<int> port = std::nullopt);

  const Config& config() const { return config_; }
  const kg::KnowledgeGraph& kg();
  std::shared_ptr<crawl::SnapshotCache> cache();
  // {K} in the remote endpoint is replaced by the budget.
  std::shared_ptr<qa::ExtractorBackend> extractor(std::optional<std::size_t> budget = std::nullopt);
  std::vector<Target> targets();
  std::vector<PageRecord> pages();

  std::filesystem::path selection_path() const { return config_.work_dir / "selection.json"; }
  std::filesystem::path pages_path() const { return config_.work_dir / "pages.jsonl"; }
  std::filesystem::path extractions_path() const { return config_.work_dir / "extractions.jsonl"; }
  std::filesystem::path model_path(const kg::PropertyId& p) const {
    return config_.work_dir / "models" / (p.str() + ".json");
  }
  std::filesystem::path report_path(const std::string& command) const {
    return config_.work_dir / "reports" / (command + ".json");
  }

 private:
  nlohmann::json finish(const std::string& command, TimePoint started, nlohmann::json outputs,
                        std::string summary);

  Config config_;
  std::unique_ptr<kg::KnowledgeGraph> kg_;
  std::shared_ptr<crawl::SnapshotCache> cache_;
  std::shared_ptr<qa::ExtractorBackend> rule_backend_;
};

}  // namespace wex::app
