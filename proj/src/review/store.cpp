#include "webextractor/review/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "webextractor/error.hpp"
#include "webextractor/util/files.hpp"

namespace wex::review {

using nlohmann::json;

json Event::to_json() const {
  json j{{"seq", seq}, {"at", at}};
  if (type == Type::proposal_submitted) {
    j["type"] = "proposal_submitted";
    j["proposal"] = review::to_json(*proposal);
  } else {
    j["type"] = "decision_made";
    j["decision"] = review::to_json(*decision);
  }
  return j;
}

Event Event::from_json(const json& j) {
  try {
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.at = j.at("at").get<std::string>();
    const std::string type = j.at("type").get<std::string>();
    if (type == "proposal_submitted") {
      e.type = Type::proposal_submitted;
      e.proposal = proposal_from_json(j.at("proposal"));
    } else if (type == "decision_made") {
      e.type = Type::decision_made;
      e.decision = decision_from_json(j.at("decision"));
    } else {
      fail(ErrorCode::integrity, "unknown event type '" + type + "'");
    }
    return e;
  } catch (const json::exception& ex) {
    fail(ErrorCode::integrity, std::string("malformed event: ") + ex.what());
  }
}

json StoreState::to_json() const {
  json items = json::array();
  for (const auto& [id, p] : proposals) items.push_back(review::to_json(p));
  return {{"version", 1}, {"seq", seq}, {"proposals", std::move(items)}};
}

StoreState StoreState::from_json(const json& j) {
  try {
    require(j.at("version").get<int>() == 1, ErrorCode::integrity, "unsupported snapshot version");
    StoreState s;
    s.seq = j.at("seq").get<std::uint64_t>();
    for (const auto& item : j.at("proposals")) {
      FactProposal p = proposal_from_json(item);
      const std::string id = p.id;
      s.proposals.emplace(id, std::move(p));
    }
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::integrity, std::string("malformed snapshot: ") + e.what());
  }
}

void apply(StoreState& state, const Event& event) {
  require(event.seq == state.seq + 1, ErrorCode::integrity,
          "event " + std::to_string(event.seq) + " does not follow " + std::to_string(state.seq));
  if (event.type == Event::Type::proposal_submitted) {
    require(event.proposal.has_value(), ErrorCode::integrity, "submission event without a proposal");
    const FactProposal& p = *event.proposal;
    require(p.status == Status::pending, ErrorCode::integrity, "submitted proposal " + p.id + " is not pending");
    require(!state.proposals.count(p.id), ErrorCode::integrity, "proposal " + p.id + " submitted twice");
    state.proposals.emplace(p.id, p);
  } else {
    require(event.decision.has_value(), ErrorCode::integrity, "decision event without a decision");
    const ReviewDecision& d = *event.decision;
    auto it = state.proposals.find(d.proposal_id);
    require(it != state.proposals.end(), ErrorCode::integrity, "decision for unknown proposal " + d.proposal_id);
    FactProposal& p = it->second;
    require(p.status == Status::pending, ErrorCode::integrity, "second decision for " + d.proposal_id);
    require(d.action == Action::reject || p.object.approvable(), ErrorCode::integrity,
            "approval of unlinked proposal " + d.proposal_id);
    p.status = d.action == Action::approve ? Status::approved : Status::rejected;
    p.reviewer = d.reviewer;
    p.decided_at = event.at;
    p.note = d.note;
  }
  state.seq = event.seq;
}

namespace {

// Complete lines of the log plus the byte length they cover.
std::pair<std::vector<std::string>, std::size_t> complete_lines(const std::string& body) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (true) {
    const std::size_t nl = body.find('\n', pos);
    if (nl == std::string::npos) break;
    lines.push_back(body.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return {std::move(lines), pos};
}

Event parse_event_line(const std::string& line, std::size_t line_no) {
  try {
    return Event::from_json(json::parse(line));
  } catch (const json::exception& e) {
    fail(ErrorCode::integrity, "event log line " + std::to_string(line_no) + ": " + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::integrity, "event log line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

StoreState replay(const std::filesystem::path& log_path) {
  StoreState state;
  if (!std::filesystem::exists(log_path)) return state;
  const auto [lines, covered] = complete_lines(files::read_file(log_path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    apply(state, parse_event_line(lines[i], i + 1));
  }
  return state;
}

json SubmitResult::to_json() const {
  json rej = json::array();
  for (const auto& r : rejected) rej.push_back({{"index", r.index}, {"id", r.id}, {"reason", r.reason}});
  return {{"accepted", accepted}, {"accepted_ids", accepted_ids}, {"duplicates", duplicates}, {"rejected", rej}};
}

ProposalStore::ProposalStore(std::filesystem::path dir, Clock clock, StoreOptions options)
    : dir_(std::move(dir)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::system_clock::now(); })),
      options_(options) {
  std::filesystem::create_directories(dir_);
  if (std::filesystem::exists(snapshot_path())) {
    try {
      state_ = StoreState::from_json(json::parse(files::read_file(snapshot_path())));
    } catch (const json::exception& e) {
      fail(ErrorCode::integrity, "unreadable snapshot " + snapshot_path().string() + ": " + e.what());
    }
  }
  std::uint64_t last_seq = 0;
  std::size_t covered = 0;
  if (std::filesystem::exists(log_path())) {
    const std::string body = files::read_file(log_path());
    auto [lines, n] = complete_lines(body);
    covered = n;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const Event e = parse_event_line(lines[i], i + 1);
      last_seq = e.seq;
      if (e.seq <= state_.seq) continue;
      apply(state_, e);
      ++since_snapshot_;
    }
  }
  require(last_seq >= state_.seq, ErrorCode::integrity,
          "snapshot at event " + std::to_string(state_.seq) + " is ahead of the log (" + std::to_string(last_seq) + ")");

  log_fd_ = ::open(log_path().c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  require(log_fd_ >= 0, ErrorCode::integrity, "cannot open " + log_path().string());
  if (::flock(log_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(log_fd_);
    log_fd_ = -1;
    fail(ErrorCode::config, "proposal store " + dir_.string() + " is in use by another process");
  }
  // Drop a torn trailing write so the next append starts on a fresh line.
  if (std::filesystem::exists(log_path()) && std::filesystem::file_size(log_path()) > covered) {
    require(::ftruncate(log_fd_, static_cast<off_t>(covered)) == 0, ErrorCode::integrity,
            "cannot truncate torn event log tail");
  }
}

ProposalStore::~ProposalStore() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void ProposalStore::append(const std::vector<Event>& events) {
  std::string bytes;
  for (const auto& e : events) bytes += e.to_json().dump() + "\n";
  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(log_fd_, bytes.data() + written, bytes.size() - written);
    require(n >= 0, ErrorCode::integrity, "event log write failed");
    written += static_cast<std::size_t>(n);
  }
  if (options_.sync) require(::fsync(log_fd_) == 0, ErrorCode::integrity, "event log fsync failed");
}

SubmitResult ProposalStore::submit(const std::vector<FactProposal>& proposals) {
  std::unique_lock lock(mutex_);
  SubmitResult result;
  const std::string now = format_utc(clock_());
  std::vector<Event> events;
  std::set<std::string> batch_ids;
  std::uint64_t seq = state_.seq;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    FactProposal p = proposals[i];
    try {
      validate(p);
    } catch (const Error& e) {
      result.rejected.push_back({i, p.id, e.what()});
      continue;
    }
    if (p.status != Status::pending || p.reviewer || p.decided_at) {
      result.rejected.push_back({i, p.id, "proposals must be submitted as pending"});
      continue;
    }
    if (state_.proposals.count(p.id) || !batch_ids.insert(p.id).second) {
      result.duplicates.push_back(p.id);
      continue;
    }
    p.created_at = now;
    p.note.reset();
    Event e;
    e.seq = ++seq;
    e.type = Event::Type::proposal_submitted;
    e.at = now;
    e.proposal = std::move(p);
    events.push_back(std::move(e));
  }
  if (events.empty()) return result;
  append(events);
  for (const auto& e : events) {
    apply(state_, e);
    result.accepted_ids.push_back(e.proposal->id);
  }
  result.accepted = events.size();
  since_snapshot_ += events.size();
  if (options_.snapshot_every > 0 && since_snapshot_ >= options_.snapshot_every) write_snapshot_locked();
  return result;
}

FactProposal ProposalStore::decide(const ReviewDecision& decision) {
  decision.validate();
  std::unique_lock lock(mutex_);
  auto it = state_.proposals.find(decision.proposal_id);
  require(it != state_.proposals.end(), ErrorCode::not_found, "no proposal " + decision.proposal_id);
  const FactProposal& p = it->second;
  require(p.status == Status::pending, ErrorCode::conflict,
          "proposal " + p.id + " was already " + std::string(status_name(p.status)) + " by " +
              p.reviewer.value_or("?"));
  require(decision.action == Action::reject || p.object.approvable(), ErrorCode::precondition,
          "proposal " + p.id + " has an unlinked object and cannot be approved");
  Event e;
  e.seq = state_.seq + 1;
  e.type = Event::Type::decision_made;
  e.at = format_utc(clock_());
  e.decision = decision;
  append({e});
  apply(state_, e);
  ++since_snapshot_;
  if (options_.snapshot_every > 0 && since_snapshot_ >= options_.snapshot_every) write_snapshot_locked();
  return state_.proposals.at(decision.proposal_id);
}

std::optional<FactProposal> ProposalStore::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = state_.proposals.find(id);
  if (it == state_.proposals.end()) return std::nullopt;
  return it->second;
}

std::vector<const FactProposal*> ProposalStore::ordered_locked() const {
  std::vector<const FactProposal*> out;
  out.reserve(state_.proposals.size());
  for (const auto& [id, p] : state_.proposals) out.push_back(&p);
  std::stable_sort(out.begin(), out.end(), [](const FactProposal* a, const FactProposal* b) {
    return std::tie(a->created_at, a->id) < std::tie(b->created_at, b->id);
  });
  return out;
}

Page ProposalStore::list(const ListQuery& q) const {
  require(q.limit >= 1 && q.limit <= 1000, ErrorCode::invalid, "limit must be between 1 and 1000");
  std::shared_lock lock(mutex_);
  std::optional<std::pair<std::string, std::string>> after;
  if (q.cursor) {
    auto it = state_.proposals.find(*q.cursor);
    require(it != state_.proposals.end(), ErrorCode::invalid, "unknown cursor '" + *q.cursor + "'");
    after = std::make_pair(it->second.created_at, it->second.id);
  }
  Page page;
  for (const FactProposal* p : ordered_locked()) {
    if (after && std::tie(p->created_at, p->id) <= std::tie(after->first, after->second)) continue;
    if (q.status && p->status != *q.status) continue;
    if (q.subject && p->subject.str() != *q.subject) continue;
    if (q.domain && p->domain != *q.domain) continue;
    if (q.property && p->property.str() != *q.property) continue;
    if (page.items.size() == q.limit) {
      page.next_cursor = page.items.back().id;
      break;
    }
    page.items.push_back(*p);
  }
  return page;
}

std::vector<FactProposal> ProposalStore::approved() const {
  std::shared_lock lock(mutex_);
  std::vector<FactProposal> out;
  for (const FactProposal* p : ordered_locked()) {
    if (p->status == Status::approved) out.push_back(*p);
  }
  return out;
}

StoreState ProposalStore::state() const {
  std::shared_lock lock(mutex_);
  return state_;
}

std::uint64_t ProposalStore::seq() const {
  std::shared_lock lock(mutex_);
  return state_.seq;
}

void ProposalStore::checkpoint() {
  std::unique_lock lock(mutex_);
  write_snapshot_locked();
}

void ProposalStore::write_snapshot_locked() {
  files::write_atomic(snapshot_path(), state_.to_json().dump() + "\n");
  since_snapshot_ = 0;
}

}  // namespace wex::review
