#include "webextractor/qa/backends.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/files.hpp"
#include "webextractor/util/text.hpp"
#include "webextractor/util/url.hpp"

namespace wex::qa {

using nlohmann::json;

RuleBackend::RuleBackend(std::vector<RulePattern> patterns) : patterns_(std::move(patterns)) {
  for (const auto& p : patterns_) {
    require(!p.question.empty(), ErrorCode::config, "rule pattern with an empty question");
    try {
      compiled_.emplace_back(p.regex, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      fail(ErrorCode::config, "invalid regex for '" + p.question + "': " + p.regex + " (" + e.what() + ")");
    }
  }
}

std::shared_ptr<RuleBackend> RuleBackend::load(const std::filesystem::path& path) {
  std::vector<RulePattern> patterns;
  try {
    const json j = json::parse(files::read_file(path));
    for (const auto& p : j.at("patterns")) {
      patterns.push_back({p.at("question").get<std::string>(), p.at("regex").get<std::string>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::config, "bad rule file " + path.string() + ": " + e.what());
  }
  return std::make_shared<RuleBackend>(std::move(patterns));
}

std::string RuleBackend::descriptor() const { return "rule/1 (" + std::to_string(patterns_.size()) + " patterns)"; }

std::vector<SpanPrediction> RuleBackend::extract_batch(std::span<const ExtractionQuery> queries) {
  std::vector<SpanPrediction> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(extract_one(q));
  return out;
}

SpanPrediction RuleBackend::extract_one(const ExtractionQuery& q) const {
  const html::CleanDocument& doc = *q.context;
  // Visible runs joined by spaces, with each byte's clean code point offset
  // and run index.
  std::string visible;
  std::vector<std::size_t> cp_at;
  std::vector<std::size_t> run_at;
  const auto runs = doc.visible_runs();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (r > 0) {
      visible.push_back(' ');
      cp_at.push_back(runs[r - 1].second);
      run_at.push_back(static_cast<std::size_t>(-1));
    }
    const std::string s = doc.substr(runs[r]);
    const auto offsets = text::code_point_offsets(s);
    for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
      for (std::size_t b = offsets[k]; b < offsets[k + 1]; ++b) {
        cp_at.push_back(runs[r].first + k);
        run_at.push_back(r);
      }
    }
    visible += s;
  }
  cp_at.push_back(runs.empty() ? 0 : runs.back().second);
  run_at.push_back(static_cast<std::size_t>(-1));

  const std::string question = text::to_lower_ascii(q.question);
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    if (question.find(text::to_lower_ascii(patterns_[i].question)) == std::string::npos) continue;
    for (std::sregex_iterator it(visible.begin(), visible.end(), compiled_[i]), end; it != end; ++it) {
      const std::smatch& m = *it;
      const std::size_t g = m.size() > 1 && m[1].matched ? 1 : 0;
      const auto b = static_cast<std::size_t>(m.position(g));
      const auto len = static_cast<std::size_t>(m.length(g));
      if (len == 0 || run_at[b] != run_at[b + len - 1] || run_at[b] == static_cast<std::size_t>(-1)) continue;
      const std::size_t start = cp_at[b];
      const std::size_t stop = cp_at[b + len - 1] + 1;
      return {q.id, start, stop, doc.substr({start, stop}), 1.0};
    }
  }
  return {q.id, 0, 0, "", 0.0};
}

RemoteBackend::RemoteBackend(std::string endpoint, RemoteOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  Url url;
  try {
    url = Url::parse(endpoint_);
  } catch (const Error& e) {
    fail(ErrorCode::config, "bad extractor endpoint '" + endpoint_ + "': " + e.what());
  }
  require(options_.batch_size > 0, ErrorCode::config, "batch_size must be > 0");
  origin_ = url.origin();
  path_ = url.path_and_query == "/" ? "/extract" : url.path_and_query;
}

std::vector<SpanPrediction> RemoteBackend::extract_batch(std::span<const ExtractionQuery> queries) {
  std::vector<SpanPrediction> out;
  out.reserve(queries.size());
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  client.set_connection_timeout(secs.count(), 0);
  client.set_read_timeout(secs.count(), 0);
  client.set_write_timeout(secs.count(), 0);
  for (std::size_t begin = 0; begin < queries.size(); begin += options_.batch_size) {
    const auto batch = queries.subspan(begin, std::min(options_.batch_size, queries.size() - begin));
    json body{{"queries", json::array()}};
    std::string ids;
    for (const auto& q : batch) {
      body["queries"].push_back({{"id", q.id}, {"question", q.question}, {"context", q.context->text()}});
      ids += (ids.empty() ? "" : ",") + q.id;
    }
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
      fail(ErrorCode::transport, "extractor " + endpoint_ + " unreachable (" + httplib::to_string(res.error()) +
                                     ") for queries " + ids);
    }
    require(res->status == 200, ErrorCode::transport,
            "extractor " + endpoint_ + " answered HTTP " + std::to_string(res->status) + " for queries " + ids);
    try {
      const json reply = json::parse(res->body);
      const auto& preds = reply.at("predictions");
      require(preds.is_array() && preds.size() == batch.size(), ErrorCode::protocol,
              "extractor returned a prediction list of the wrong length");
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const auto& p = preds[k];
        const auto start = p.at("start").get<std::int64_t>();
        const auto stop = p.at("end").get<std::int64_t>();
        require(start >= 0 && stop >= 0, ErrorCode::protocol, "negative offsets for query " + batch[k].id);
        SpanPrediction sp{p.at("id").get<std::string>(), static_cast<std::size_t>(start),
                          static_cast<std::size_t>(stop), p.at("text").get<std::string>(),
                          p.at("score").get<double>()};
        check_prediction(batch[k], sp);
        out.push_back(std::move(sp));
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::protocol, "malformed extractor reply for queries " + ids + ": " + e.what());
    }
  }
  return out;
}

ExtractorServer::ExtractorServer(std::shared_ptr<ExtractorBackend> backend, html::TagPolicy policy,
                                 std::size_t max_batch)
    : backend_(std::move(backend)),
      policy_(std::move(policy)),
      max_batch_(max_batch),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ExtractorServer::~ExtractorServer() { stop(); }

void ExtractorServer::install_routes() {
  auto reply_error = [](httplib::Response& res, int status, const std::string& code, const std::string& msg) {
    res.status = status;
    res.set_content(json{{"error", {{"code", code}, {"message", msg}}}}.dump(), "application/json");
  };
  server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}, {"backend", backend_->descriptor()}}.dump(), "application/json");
  });
  server_->Post("/extract", [this, reply_error](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    std::vector<ExtractionQuery> queries;
    try {
      const json body = json::parse(req.body);
      const auto& qs = body.at("queries");
      if (!qs.is_array()) return reply_error(res, 400, "bad_request", "queries must be an array");
      if (qs.size() > max_batch_) {
        return reply_error(res, 400, "bad_request", "batch exceeds " + std::to_string(max_batch_) + " queries");
      }
      for (const auto& q : qs) {
        auto ctx = std::make_shared<const html::CleanDocument>(
            html::parse_clean_text(q.at("context").get<std::string>(), policy_));
        queries.push_back({q.at("id").get<std::string>(), q.at("question").get<std::string>(), std::move(ctx)});
      }
    } catch (const json::exception& e) {
      return reply_error(res, 400, "bad_request", e.what());
    }
    try {
      const auto preds = extract_all(queries, *backend_);
      json out{{"predictions", json::array()}};
      for (const auto& p : preds) out["predictions"].push_back(p.to_json());
      res.set_content(out.dump(), "application/json");
    } catch (const Error& e) {
      const int status = e.code() == ErrorCode::precondition ? 400 : 500;
      reply_error(res, status, std::string(error_code_name(e.code())), e.what());
    }
  });
}

int ExtractorServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  require(port_ > 0, ErrorCode::transport, "cannot bind extractor server on " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ExtractorServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  require(server_->listen(host, port), ErrorCode::transport,
          "cannot serve on " + host + ":" + std::to_string(port));
}

void ExtractorServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ExtractorServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace wex::qa
