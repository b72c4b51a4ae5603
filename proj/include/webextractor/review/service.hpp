#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <utility>

#include "webextractor/error.hpp"
#include "webextractor/review/store.hpp"

namespace httplib {
class Server;
}

namespace wex::review {

// HTTP API over a ProposalStore. Every reply is {"data": ..., "next_cursor": ...}
// or {"error": {"code", "message"}}.
//
//   GET  /proposals?status=&subject=&domain=&property=&cursor=&limit=
//   GET  /proposals/{id}
//   POST /proposals                 {"proposals": [...]}
//   POST /proposals/{id}/decision   {"action", "reviewer", "note"}; reviewer may come from X-Reviewer
//   GET  /export?format=json|quickstatements
//   GET  /health
class ProposalService {
 public:
  explicit ProposalService(std::shared_ptr<ProposalStore> store);
  ~ProposalService();
  ProposalService(const ProposalService&) = delete;
  ProposalService& operator=(const ProposalService&) = delete;

  int start(const std::string& host = "127.0.0.1", int port = 0);
  void listen(const std::string& host, int port);
  void stop();

  std::string url() const;
  ProposalStore& store() { return *store_; }

 private:
  void install_routes();

  std::shared_ptr<ProposalStore> store_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

// HTTP status and wire code for a library error.
std::pair<int, std::string> http_error_for(const Error& e);

}  // namespace wex::review
