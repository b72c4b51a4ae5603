#include "webextractor/review/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/review/export.hpp"

namespace wex::review {

using nlohmann::json;

std::pair<int, std::string> http_error_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::invalid: return {400, "invalid"};
    case ErrorCode::not_found: return {404, "not_found"};
    case ErrorCode::conflict: return {409, "conflict"};
    case ErrorCode::precondition: return {422, "not_approvable"};
    default: return {500, std::string(error_code_name(e.code()))};
  }
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_data(httplib::Response& res, json data, const std::optional<std::string>& next_cursor = std::nullopt) {
  json body{{"data", std::move(data)}};
  if (next_cursor) body["next_cursor"] = *next_cursor;
  reply(res, 200, body);
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, json{{"error", {{"code", code}, {"message", message}}}});
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  std::string v = req.get_param_value(key);
  if (v.empty()) return std::nullopt;
  return v;
}

// Runs a handler, mapping library and JSON errors onto the error envelope.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    const auto [status, code] = http_error_for(e);
    reply_error(res, status, code, e.what());
  } catch (const json::exception& e) {
    reply_error(res, 400, "invalid", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

ProposalService::ProposalService(std::shared_ptr<ProposalStore> store)
    : store_(std::move(store)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ProposalService::~ProposalService() { stop(); }

void ProposalService::install_routes() {
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, X-Reviewer");
    res.status = 204;
  });

  server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    const StoreState s = store_->state();
    reply_data(res, {{"status", "ok"}, {"proposals", s.proposals.size()}, {"seq", s.seq}});
  });

  server_->Get("/proposals", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      ListQuery q;
      if (auto s = param(req, "status")) q.status = parse_status(*s);
      q.subject = param(req, "subject");
      q.domain = param(req, "domain");
      q.property = param(req, "property");
      q.cursor = param(req, "cursor");
      if (auto l = param(req, "limit")) {
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(l->data(), l->data() + l->size(), n);
        require(ec == std::errc() && ptr == l->data() + l->size(), ErrorCode::invalid, "bad limit '" + *l + "'");
        q.limit = n;
      }
      const Page page = store_->list(q);
      json items = json::array();
      for (const auto& p : page.items) items.push_back(to_json(p));
      reply_data(res, std::move(items), page.next_cursor);
    });
  });

  server_->Get(R"(/proposals/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      auto p = store_->get(id);
      require(p.has_value(), ErrorCode::not_found, "no proposal " + id);
      reply_data(res, to_json(*p));
    });
  });

  server_->Post("/proposals", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const json& items = body.is_array() ? body : body.at("proposals");
      require(items.is_array(), ErrorCode::invalid, "proposals must be an array");
      // Items that do not parse are reported next to the store's rejections,
      // under their position in the request.
      std::vector<FactProposal> parsed;
      std::vector<std::size_t> position;
      std::vector<SubmitRejection> unparsed;
      for (std::size_t i = 0; i < items.size(); ++i) {
        try {
          parsed.push_back(proposal_from_json(items[i]));
          position.push_back(i);
        } catch (const Error& e) {
          unparsed.push_back({i, items[i].is_object() ? items[i].value("id", std::string()) : "", e.what()});
        }
      }
      SubmitResult result = store_->submit(parsed);
      for (auto& r : result.rejected) r.index = position[r.index];
      result.rejected.insert(result.rejected.end(), unparsed.begin(), unparsed.end());
      std::sort(result.rejected.begin(), result.rejected.end(),
                [](const SubmitRejection& a, const SubmitRejection& b) { return a.index < b.index; });
      reply_data(res, result.to_json());
    });
  });

  server_->Post(R"(/proposals/([^/]+)/decision)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body.empty() ? "{}" : req.body);
      require(body.is_object(), ErrorCode::invalid, "decision body must be an object");
      ReviewDecision d = decision_from_json(body);
      const std::string id = req.matches[1];
      require(d.proposal_id.empty() || d.proposal_id == id, ErrorCode::invalid,
              "decision body names proposal " + d.proposal_id + " but the path names " + id);
      d.proposal_id = id;
      if (d.reviewer.empty()) d.reviewer = req.get_header_value("X-Reviewer");
      reply_data(res, to_json(store_->decide(d)));
    });
  });

  server_->Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const ExportFormat f = parse_export_format(param(req, "format").value_or("json"));
      const auto approved = store_->approved();
      if (f == ExportFormat::json) {
        reply_data(res, export_json(approved));
      } else {
        reply_data(res, export_quickstatements(approved));
      }
    });
  });
}

int ProposalService::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  require(port_ > 0, ErrorCode::transport, "cannot bind proposals service on " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ProposalService::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  require(server_->listen(host, port), ErrorCode::transport, "cannot serve on " + host + ":" + std::to_string(port));
}

void ProposalService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ProposalService::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace wex::review
