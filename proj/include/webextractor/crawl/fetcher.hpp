#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace wex::crawl {

struct FetchRequest {
  std::string url;
  std::chrono::milliseconds timeout{30000};
  std::string user_agent;
};

struct FetchResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

// One way of getting page bytes. Implementations throw transport errors for
// network-level failures; HTTP error statuses are returned, not thrown.
class FetchBackend {
 public:
  virtual ~FetchBackend() = default;
  virtual FetchResponse fetch(const FetchRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Static HTTP(S) GET, redirects followed.
class HttpBackend final : public FetchBackend {
 public:
  FetchResponse fetch(const FetchRequest& request) override;
  std::string name() const override { return "http"; }
};

// Pages served from local files, for hermetic runs. The index is JSON:
//   {"pages": [{"url": ..., "file": ..., "status": 200, "content_type": ...}]}
// with file paths relative to the index. Unknown URLs answer 404.
class FixtureBackend final : public FetchBackend {
 public:
  struct Page {
    std::filesystem::path file;
    int status = 200;
    std::string content_type = "text/html; charset=utf-8";
  };

  FixtureBackend() = default;
  static std::shared_ptr<FixtureBackend> load(const std::filesystem::path& index_file);

  void add(const std::string& url, Page page);
  FetchResponse fetch(const FetchRequest& request) override;
  std::string name() const override { return "fixture"; }

  std::size_t hits() const { return hits_; }
  const std::map<std::string, Page>& pages() const { return pages_; }

 private:
  std::map<std::string, Page> pages_;
  std::atomic<std::size_t> hits_{0};
};

// Rendered fetch through an external command (e.g. a headless browser
// wrapper). "{url}" in the template is replaced by the shell-quoted URL;
// stdout is the page body, a non-zero exit is a transport error.
class CommandBackend final : public FetchBackend {
 public:
  explicit CommandBackend(std::string command_template);
  FetchResponse fetch(const FetchRequest& request) override;
  std::string name() const override { return "rendered"; }

 private:
  std::string template_;
};

}  // namespace wex::crawl
