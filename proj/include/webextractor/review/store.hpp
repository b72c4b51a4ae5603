#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webextractor/review/proposal.hpp"
#include "webextractor/util/digest.hpp"

namespace wex::review {

// One line of the append-only log.
struct Event {
  enum class Type { proposal_submitted, decision_made };

  std::uint64_t seq = 0;
  Type type = Type::proposal_submitted;
  std::string at;  // ISO-8601 UTC
  std::optional<FactProposal> proposal;
  std::optional<ReviewDecision> decision;

  nlohmann::json to_json() const;
  static Event from_json(const nlohmann::json& j);
};

struct StoreState {
  std::uint64_t seq = 0;  // last applied event
  std::map<std::string, FactProposal> proposals;

  bool operator==(const StoreState&) const = default;
  nlohmann::json to_json() const;
  static StoreState from_json(const nlohmann::json& j);
};

// The fold step. Integrity error when the event does not follow state
// (sequence gap, unknown proposal, decision on a decided proposal).
void apply(StoreState& state, const Event& event);

// Folds every event of an NDJSON log onto an empty state. A final line
// without its newline is a torn write and is ignored; any other malformed
// line is an integrity error.
StoreState replay(const std::filesystem::path& log_path);

struct SubmitRejection {
  std::size_t index = 0;
  std::string id;
  std::string reason;
};

struct SubmitResult {
  std::size_t accepted = 0;
  std::vector<std::string> accepted_ids;
  std::vector<std::string> duplicates;
  std::vector<SubmitRejection> rejected;

  nlohmann::json to_json() const;
};

struct ListQuery {
  std::optional<Status> status;
  std::optional<std::string> subject;
  std::optional<std::string> domain;
  std::optional<std::string> property;
  std::optional<std::string> cursor;  // id of the last item of the previous page
  std::size_t limit = 50;
};

struct Page {
  std::vector<FactProposal> items;
  std::optional<std::string> next_cursor;
};

struct StoreOptions {
  std::size_t snapshot_every = 256;  // events between snapshot rewrites; 0 disables
  bool sync = true;                  // fsync the log before acknowledging
};

// Proposal store backed by <dir>/events.ndjson and <dir>/snapshot.json.
// Reads share a lock; writes are serialized and reach the log before the
// in-memory state changes.
class ProposalStore {
 public:
  using Clock = std::function<TimePoint()>;

  explicit ProposalStore(std::filesystem::path dir, Clock clock = {}, StoreOptions options = {});
  ~ProposalStore();
  ProposalStore(const ProposalStore&) = delete;
  ProposalStore& operator=(const ProposalStore&) = delete;

  // Idempotent by id. Items that are malformed or not pending are rejected
  // one by one; the rest of the batch still goes in.
  SubmitResult submit(const std::vector<FactProposal>& proposals);

  // not_found for an unknown id, conflict when already decided, precondition
  // when approving an unlinked object.
  FactProposal decide(const ReviewDecision& decision);

  std::optional<FactProposal> get(const std::string& id) const;
  // Ordered by (created_at, id). Invalid error for an unknown cursor.
  Page list(const ListQuery& query) const;
  std::vector<FactProposal> approved() const;  // same order as list

  StoreState state() const;
  std::uint64_t seq() const;
  void checkpoint();  // rewrite the snapshot now

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path log_path() const { return dir_ / "events.ndjson"; }
  std::filesystem::path snapshot_path() const { return dir_ / "snapshot.json"; }

 private:
  void append(const std::vector<Event>& events);
  void write_snapshot_locked();
  std::vector<const FactProposal*> ordered_locked() const;

  std::filesystem::path dir_;
  Clock clock_;
  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  StoreState state_;
  int log_fd_ = -1;
  std::uint64_t since_snapshot_ = 0;
};

}  // namespace wex::review
