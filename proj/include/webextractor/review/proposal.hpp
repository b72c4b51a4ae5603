#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "webextractor/html/clean_document.hpp"
#include "webextractor/kg/types.hpp"

namespace wex::review {

enum class Status { pending, approved, rejected };

std::string_view status_name(Status s);
Status parse_status(std::string_view s);  // invalid error on anything else

// Object of a proposed fact. Unlinked objects carry the span text the linker
// could not resolve; they can be listed and rejected but never approved.
struct ProposalObject {
  enum class Kind { item, literal, unlinked };

  Kind kind = Kind::unlinked;
  std::string value;

  static ProposalObject item(const kg::EntityId& id) { return {Kind::item, id.str()}; }
  static ProposalObject literal(std::string v) { return {Kind::literal, std::move(v)}; }
  static ProposalObject unlinked(std::string text) { return {Kind::unlinked, std::move(text)}; }

  bool approvable() const { return kind != Kind::unlinked; }
  bool operator==(const ProposalObject&) const = default;
};

std::string_view object_kind_name(ProposalObject::Kind k);

struct Evidence {
  std::string source_url;
  html::Range raw_byte_range;  // into the snapshot identified by snapshot_hash
  html::Range clean_span;      // code points of the clean document
  std::string span_text;
  std::string snapshot_hash;
  std::string retrieved_at;  // ISO-8601 UTC

  bool operator==(const Evidence&) const = default;
};

struct FactProposal {
  std::string id;
  kg::EntityId subject;
  kg::PropertyId property;
  ProposalObject object;
  std::string domain;  // external identifier property of the source site
  Evidence evidence;
  double extraction_score = 0.0;
  std::optional<double> linking_score;
  Status status = Status::pending;
  std::optional<std::string> reviewer;
  std::optional<std::string> decided_at;
  std::optional<std::string> note;
  std::string created_at;

  bool operator==(const FactProposal&) const = default;
};

// Hash of subject, property, object and evidence location.
std::string proposal_id(const FactProposal& p);

// Invalid error naming the first broken invariant. Checks the shape only,
// not that the proposal is new or pending.
void validate(const FactProposal& p);

nlohmann::json to_json(const FactProposal& p);
// Missing id is filled in with proposal_id; missing status means pending.
FactProposal proposal_from_json(const nlohmann::json& j);

enum class Action { approve, reject };

std::string_view action_name(Action a);
Action parse_action(std::string_view s);

struct ReviewDecision {
  std::string proposal_id;
  Action action = Action::reject;
  std::string reviewer;
  std::optional<std::string> note;

  void validate() const;  // invalid error on an empty id or reviewer
  bool operator==(const ReviewDecision&) const = default;
};

nlohmann::json to_json(const ReviewDecision& d);
ReviewDecision decision_from_json(const nlohmann::json& j);

}  // namespace wex::review
