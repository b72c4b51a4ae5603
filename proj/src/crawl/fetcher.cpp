#include "webextractor/crawl/fetcher.hpp"

#include <httplib.h>
#include <sys/wait.h>

#include <cstdio>
#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/files.hpp"
#include "webextractor/util/url.hpp"

namespace wex::crawl {

FetchResponse HttpBackend::fetch(const FetchRequest& request) {
  const Url url = Url::parse(request.url);
  httplib::Client client(url.origin());
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);
  httplib::Headers headers{{"User-Agent", request.user_agent}, {"Accept", "text/html,*/*;q=0.8"}};
  auto res = client.Get(url.path_and_query, headers);
  if (!res) {
    fail(ErrorCode::transport, "GET " + request.url + " failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body, res->get_header_value("Content-Type")};
}

std::shared_ptr<FixtureBackend> FixtureBackend::load(const std::filesystem::path& index_file) {
  auto backend = std::make_shared<FixtureBackend>();
  try {
    const auto j = nlohmann::json::parse(files::read_file(index_file));
    for (const auto& p : j.at("pages")) {
      Page page;
      page.file = index_file.parent_path() / p.at("file").get<std::string>();
      page.status = p.value("status", 200);
      page.content_type = p.value("content_type", page.content_type);
      backend->add(p.at("url").get<std::string>(), std::move(page));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config, "bad fixture index " + index_file.string() + ": " + e.what());
  }
  return backend;
}

void FixtureBackend::add(const std::string& url, Page page) { pages_[url] = std::move(page); }

FetchResponse FixtureBackend::fetch(const FetchRequest& request) {
  ++hits_;
  auto it = pages_.find(request.url);
  if (it == pages_.end()) return {404, "", "text/plain"};
  return {it->second.status, files::read_file(it->second.file), it->second.content_type};
}

CommandBackend::CommandBackend(std::string command_template) : template_(std::move(command_template)) {
  require(template_.find("{url}") != std::string::npos, ErrorCode::config,
          "rendered fetch command must contain {url}");
}

FetchResponse CommandBackend::fetch(const FetchRequest& request) {
  std::string quoted = "'";
  for (char c : request.url) {
    if (c == '\'') quoted += "'\\''";
    else quoted += c;
  }
  quoted += "'";
  std::string command = template_;
  command.replace(command.find("{url}"), 5, quoted);
  FILE* pipe = popen(command.c_str(), "r");
  require(pipe != nullptr, ErrorCode::transport, "cannot start rendered fetch command");
  std::string body;
  char buf[8192];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) body.append(buf, n);
  const int status = pclose(pipe);
  require(status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0, ErrorCode::transport,
          "rendered fetch failed for " + request.url);
  return {200, std::move(body), "text/html; charset=utf-8"};
}

}  // namespace wex::crawl
