#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "webextractor/crawl/snapshot.hpp"

namespace wex::crawl {

// Content-addressed snapshot store:
//   <dir>/objects/<sha256>   raw bytes
//   <dir>/index.json         url -> {hash, fetched_at, status, content_type}
// Both are written temp-then-rename. Thread-safe.
class SnapshotCache {
 public:
  explicit SnapshotCache(std::filesystem::path dir);

  // Latest snapshot for url. Integrity error if the stored bytes no longer
  // hash to the indexed digest.
  std::optional<PageSnapshot> lookup(const std::string& url) const;

  void store(const PageSnapshot& snapshot);

  // Raw bytes by digest, verified.
  std::optional<std::string> object(const std::string& content_hash) const;

  std::size_t size() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct Entry {
    std::string hash;
    std::string fetched_at;
    int status = 0;
    std::string content_type;
  };

  void write_index() const;
  std::filesystem::path object_path(const std::string& hash) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> index_;
};

}  // namespace wex::crawl
