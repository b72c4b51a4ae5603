#include "webextractor/review/proposal.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/digest.hpp"
#include "webextractor/util/text.hpp"

namespace wex::review {

using nlohmann::json;

std::string_view status_name(Status s) {
  switch (s) {
    case Status::pending: return "pending";
    case Status::approved: return "approved";
    case Status::rejected: return "rejected";
  }
  return "?";
}

Status parse_status(std::string_view s) {
  if (s == "pending") return Status::pending;
  if (s == "approved") return Status::approved;
  if (s == "rejected") return Status::rejected;
  fail(ErrorCode::invalid, "unknown status '" + std::string(s) + "'");
}

std::string_view object_kind_name(ProposalObject::Kind k) {
  switch (k) {
    case ProposalObject::Kind::item: return "item";
    case ProposalObject::Kind::literal: return "literal";
    case ProposalObject::Kind::unlinked: return "unlinked";
  }
  return "?";
}

namespace {

ProposalObject::Kind parse_object_kind(std::string_view s) {
  if (s == "item") return ProposalObject::Kind::item;
  if (s == "literal") return ProposalObject::Kind::literal;
  if (s == "unlinked") return ProposalObject::Kind::unlinked;
  fail(ErrorCode::invalid, "unknown object kind '" + std::string(s) + "'");
}

bool is_hex_digest(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

json range_json(const html::Range& r) { return json::array({r.first, r.second}); }

html::Range range_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorCode::invalid, "range must be a [start, end] pair");
  return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

}  // namespace

std::string proposal_id(const FactProposal& p) {
  const std::string rs = std::to_string(p.evidence.raw_byte_range.first);
  const std::string re = std::to_string(p.evidence.raw_byte_range.second);
  return stable_id({p.subject.str(), p.property.str(), object_kind_name(p.object.kind), p.object.value,
                    p.evidence.snapshot_hash, rs, re});
}

void validate(const FactProposal& p) {
  auto check = [&](bool ok, const std::string& what) {
    require(ok, ErrorCode::invalid, "proposal " + (p.id.empty() ? std::string("(no id)") : p.id) + ": " + what);
  };
  check(kg::EntityId::is_valid(p.subject.str()), "subject is not an entity id");
  check(!p.property.empty(), "property is empty");
  if (p.object.kind == ProposalObject::Kind::item) {
    check(kg::EntityId::is_valid(p.object.value), "item object is not an entity id");
  } else {
    check(!text::trim(p.object.value).empty(), "object value is empty");
  }
  const Evidence& e = p.evidence;
  check(!e.source_url.empty(), "evidence has no source url");
  check(!e.span_text.empty(), "evidence span text is empty");
  check(e.raw_byte_range.first < e.raw_byte_range.second, "evidence raw byte range is empty");
  check(e.clean_span.first < e.clean_span.second, "evidence clean span is empty");
  check(is_hex_digest(e.snapshot_hash), "evidence snapshot hash is not a sha-256 hex digest");
  check(std::isfinite(p.extraction_score), "extraction score is not finite");
  check(!p.linking_score || std::isfinite(*p.linking_score), "linking score is not finite");
  check(p.status == Status::pending || p.object.approvable() || p.status == Status::rejected,
        "approved proposal has an unlinked object");
  check(!p.id.empty() && p.id == proposal_id(p), "id does not match its content");
}

json to_json(const FactProposal& p) {
  const Evidence& e = p.evidence;
  return {{"id", p.id},
          {"subject", p.subject.str()},
          {"property", p.property.str()},
          {"object", {{"kind", object_kind_name(p.object.kind)}, {"value", p.object.value}}},
          {"domain", p.domain},
          {"evidence",
           {{"source_url", e.source_url},
            {"raw_byte_range", range_json(e.raw_byte_range)},
            {"clean_span", range_json(e.clean_span)},
            {"span_text", e.span_text},
            {"snapshot_hash", e.snapshot_hash},
            {"retrieved_at", e.retrieved_at}}},
          {"extraction_score", p.extraction_score},
          {"linking_score", p.linking_score ? json(*p.linking_score) : json(nullptr)},
          {"status", status_name(p.status)},
          {"reviewer", optional_json(p.reviewer)},
          {"decided_at", optional_json(p.decided_at)},
          {"note", optional_json(p.note)},
          {"created_at", p.created_at}};
}

FactProposal proposal_from_json(const json& j) {
  try {
    FactProposal p;
    p.subject = kg::EntityId(j.at("subject").get<std::string>());
    p.property = kg::PropertyId(j.at("property").get<std::string>());
    const json& o = j.at("object");
    p.object = {parse_object_kind(o.at("kind").get<std::string>()), o.at("value").get<std::string>()};
    p.domain = j.value("domain", std::string());
    const json& e = j.at("evidence");
    p.evidence.source_url = e.at("source_url").get<std::string>();
    p.evidence.raw_byte_range = range_from_json(e.at("raw_byte_range"));
    p.evidence.clean_span = range_from_json(e.at("clean_span"));
    p.evidence.span_text = e.at("span_text").get<std::string>();
    p.evidence.snapshot_hash = e.at("snapshot_hash").get<std::string>();
    p.evidence.retrieved_at = e.value("retrieved_at", std::string());
    p.extraction_score = j.at("extraction_score").get<double>();
    if (j.contains("linking_score") && !j.at("linking_score").is_null()) {
      p.linking_score = j.at("linking_score").get<double>();
    }
    if (j.contains("status") && !j.at("status").is_null()) p.status = parse_status(j.at("status").get<std::string>());
    p.reviewer = optional_string(j, "reviewer");
    p.decided_at = optional_string(j, "decided_at");
    p.note = optional_string(j, "note");
    p.created_at = j.value("created_at", std::string());
    p.id = j.contains("id") && !j.at("id").is_null() ? j.at("id").get<std::string>() : proposal_id(p);
    return p;
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid, std::string("malformed proposal: ") + e.what());
  }
}

std::string_view action_name(Action a) { return a == Action::approve ? "approve" : "reject"; }

Action parse_action(std::string_view s) {
  if (s == "approve") return Action::approve;
  if (s == "reject") return Action::reject;
  fail(ErrorCode::invalid, "action must be approve or reject, got '" + std::string(s) + "'");
}

void ReviewDecision::validate() const {
  require(!proposal_id.empty(), ErrorCode::invalid, "decision without a proposal id");
  require(!text::trim(reviewer).empty(), ErrorCode::invalid, "decision without a reviewer");
}

json to_json(const ReviewDecision& d) {
  return {{"proposal_id", d.proposal_id},
          {"action", action_name(d.action)},
          {"reviewer", d.reviewer},
          {"note", optional_json(d.note)}};
}

ReviewDecision decision_from_json(const json& j) {
  try {
    ReviewDecision d;
    d.proposal_id = j.value("proposal_id", std::string());
    d.action = parse_action(j.at("action").get<std::string>());
    d.reviewer = j.value("reviewer", std::string());
    d.note = optional_string(j, "note");
    return d;
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid, std::string("malformed decision: ") + e.what());
  }
}

}  // namespace wex::review
