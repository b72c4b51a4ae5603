#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "webextractor/html/normalizer.hpp"
#include "webextractor/qa/extractor.hpp"

namespace httplib {
class Server;
}

namespace wex::qa {

struct RulePattern {
  std::string question;  // case-insensitive substring of the question
  std::string regex;     // ECMAScript, case-insensitive; group 1 is the answer if present
};

// Deterministic backend: the first pattern whose question matches and whose
// regex finds an answer inside one visible run wins. Regexes see the visible
// runs joined by single spaces, never markup tokens.
class RuleBackend final : public ExtractorBackend {
 public:
  explicit RuleBackend(std::vector<RulePattern> patterns);  // config error on a bad regex

  // JSON: {"patterns": [{"question": ..., "regex": ...}]}
  static std::shared_ptr<RuleBackend> load(const std::filesystem::path& path);

  std::vector<SpanPrediction> extract_batch(std::span<const ExtractionQuery> queries) override;
  std::string descriptor() const override;

 private:
  SpanPrediction extract_one(const ExtractionQuery& q) const;

  std::vector<RulePattern> patterns_;
  std::vector<std::regex> compiled_;
};

struct RemoteOptions {
  std::size_t batch_size = 48;
  std::chrono::milliseconds timeout{60000};
};

// Client for the POST /extract wire protocol.
class RemoteBackend final : public ExtractorBackend {
 public:
  explicit RemoteBackend(std::string endpoint, RemoteOptions options = {});

  std::vector<SpanPrediction> extract_batch(std::span<const ExtractionQuery> queries) override;
  std::string descriptor() const override { return "remote:" + endpoint_; }

 private:
  std::string endpoint_;
  std::string origin_;
  std::string path_;
  RemoteOptions options_;
};

// Serves a backend over the wire protocol: POST /extract and GET /health.
// Contexts arrive as clean text and are rebuilt with the tag policy.
class ExtractorServer {
 public:
  ExtractorServer(std::shared_ptr<ExtractorBackend> backend, html::TagPolicy policy = {},
                  std::size_t max_batch = 256);
  ~ExtractorServer();
  ExtractorServer(const ExtractorServer&) = delete;
  ExtractorServer& operator=(const ExtractorServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

  std::string url() const;
  std::size_t requests() const { return requests_; }

 private:
  void install_routes();

  std::shared_ptr<ExtractorBackend> backend_;
  html::TagPolicy policy_;
  std::size_t max_batch_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace wex::qa
