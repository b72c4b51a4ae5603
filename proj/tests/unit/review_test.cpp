#include <gtest/gtest.h>

#include <httplib.h>

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "webextractor/error.hpp"
#include "webextractor/review/export.hpp"
#include "webextractor/review/service.hpp"
#include "webextractor/review/store.hpp"
#include "webextractor/util/files.hpp"
#include "webextractor/util/text.hpp"

using namespace wex;
using namespace wex::review;
using nlohmann::json;
using testkit::sample_proposal;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid;
}

ReviewDecision decision(const std::string& id, Action a, std::string reviewer = "alice",
                        std::optional<std::string> note = std::nullopt) {
  return {id, a, std::move(reviewer), std::move(note)};
}

std::vector<FactProposal> three() {
  return {sample_proposal("Q994013", "P69", ProposalObject::item(kg::EntityId("Q34433")), 1),
          sample_proposal("Q994013", "P1412", ProposalObject::unlinked("Klingon"), 2),
          sample_proposal("Q5", "P569", ProposalObject::literal("1997"), 3)};
}

class StoreTest : public ::testing::Test {
 protected:
  testkit::TempDir dir;
  std::unique_ptr<ProposalStore> open(StoreOptions options = {}) {
    return std::make_unique<ProposalStore>(dir.path() / "store", testkit::ticking_clock(), options);
  }
};

}  // namespace

// ---- proposal shape ----

TEST(Proposal, IdIsStableAndContentBound) {
  const auto a = sample_proposal("Q1", "P2", ProposalObject::item(kg::EntityId("Q3")), 0);
  auto b = a;
  b.extraction_score = 0.1;
  b.created_at = "2030-01-01T00:00:00Z";
  EXPECT_EQ(proposal_id(a), proposal_id(b));
  b.object = ProposalObject::item(kg::EntityId("Q4"));
  EXPECT_NE(proposal_id(a), proposal_id(b));
  EXPECT_NO_THROW(validate(a));
}

TEST(Proposal, ValidationNamesTheBrokenInvariant) {
  auto base = sample_proposal("Q1", "P2", ProposalObject::item(kg::EntityId("Q3")), 0);
  auto expect_invalid = [&](auto mutate, const std::string& needle) {
    auto p = base;
    mutate(p);
    try {
      validate(p);
      ADD_FAILURE() << "accepted: " << needle;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid);
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_invalid([](FactProposal& p) { p.evidence.span_text.clear(); }, "span text");
  expect_invalid([](FactProposal& p) { p.evidence.snapshot_hash = "abc"; }, "snapshot hash");
  expect_invalid([](FactProposal& p) { p.evidence.clean_span = {5, 5}; }, "clean span");
  expect_invalid([](FactProposal& p) { p.id = "deadbeef"; }, "id");
  expect_invalid(
      [](FactProposal& p) {
        p.object = ProposalObject::unlinked("x");
        p.status = Status::approved;
        p.id = proposal_id(p);
      },
      "unlinked");
}

TEST(Proposal, JsonRoundTrip) {
  for (auto p : three()) {
    p.status = Status::rejected;
    p.reviewer = "bob";
    p.note = "wrong page";
    p.decided_at = "2026-02-02T00:00:00Z";
    EXPECT_EQ(proposal_from_json(to_json(p)), p);
  }
  auto j = to_json(three()[0]);
  j.erase("id");
  j.erase("status");
  const auto back = proposal_from_json(j);
  EXPECT_EQ(back.id, three()[0].id);
  EXPECT_EQ(back.status, Status::pending);
  EXPECT_EQ(code_of([] { parse_status("done"); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([] { parse_action("maybe"); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([] { decision("x", Action::approve, "").validate(); }), ErrorCode::invalid);
}

// ---- store ----

TEST_F(StoreTest, SubmitThreeAllPending) {
  auto store = open();
  const auto r = store->submit(three());
  EXPECT_EQ(r.accepted, 3u);
  EXPECT_TRUE(r.rejected.empty());
  ListQuery q;
  q.status = Status::pending;
  EXPECT_EQ(store->list(q).items.size(), 3u);
}

TEST_F(StoreTest, ResubmissionIsANoop) {
  auto store = open();
  store->submit(three());
  const auto before = store->state();
  const auto log_before = files::read_file(store->log_path());
  const auto r = store->submit({three()[0]});
  EXPECT_EQ(r.accepted, 0u);
  EXPECT_EQ(r.duplicates, std::vector<std::string>{three()[0].id});
  EXPECT_EQ(store->state(), before);
  EXPECT_EQ(files::read_file(store->log_path()), log_before);
}

TEST_F(StoreTest, NonPendingAndMalformedItemsAreRejectedOneByOne) {
  auto store = open();
  auto items = three();
  items[0].status = Status::approved;
  items[1].evidence.span_text.clear();
  const auto r = store->submit(items);
  EXPECT_EQ(r.accepted, 1u);
  ASSERT_EQ(r.rejected.size(), 2u);
  EXPECT_EQ(r.rejected[0].index, 0u);
  EXPECT_NE(r.rejected[0].reason.find("pending"), std::string::npos);
  EXPECT_EQ(r.rejected[1].index, 1u);
}

TEST_F(StoreTest, FiltersAndPagination) {
  auto store = open();
  store->submit(three());
  ListQuery by_subject;
  by_subject.subject = "Q994013";
  const auto page = store->list(by_subject);
  ASSERT_EQ(page.items.size(), 2u);
  for (const auto& p : page.items) EXPECT_EQ(p.subject.str(), "Q994013");

  ListQuery q;
  q.limit = 2;
  const auto first = store->list(q);
  ASSERT_EQ(first.items.size(), 2u);
  ASSERT_TRUE(first.next_cursor);
  q.cursor = first.next_cursor;
  const auto second = store->list(q);
  ASSERT_EQ(second.items.size(), 1u);
  EXPECT_FALSE(second.next_cursor);
  for (const auto& p : first.items) EXPECT_NE(p.id, second.items[0].id);

  q.cursor = "nope";
  EXPECT_EQ(code_of([&] { store->list(q); }), ErrorCode::invalid);
  q.cursor.reset();
  q.limit = 0;
  EXPECT_EQ(code_of([&] { store->list(q); }), ErrorCode::invalid);
}

TEST_F(StoreTest, DecisionsAreFinal) {
  auto store = open();
  const auto items = three();
  store->submit(items);
  const auto approved = store->decide(decision(items[0].id, Action::approve));
  EXPECT_EQ(approved.status, Status::approved);
  EXPECT_EQ(approved.reviewer, "alice");
  EXPECT_TRUE(approved.decided_at);
  EXPECT_EQ(code_of([&] { store->decide(decision(items[0].id, Action::reject, "bob")); }), ErrorCode::conflict);
  EXPECT_EQ(store->get(items[0].id)->status, Status::approved);

  const auto rejected = store->decide(decision(items[2].id, Action::reject, "bob", "not on page"));
  EXPECT_EQ(rejected.status, Status::rejected);
  EXPECT_EQ(rejected.note, "not on page");

  EXPECT_EQ(code_of([&] { store->decide(decision("missing", Action::reject)); }), ErrorCode::not_found);
}

TEST_F(StoreTest, UnlinkedCanBeRejectedButNotApproved) {
  auto store = open();
  const auto items = three();
  store->submit(items);
  EXPECT_EQ(code_of([&] { store->decide(decision(items[1].id, Action::approve)); }), ErrorCode::precondition);
  EXPECT_EQ(store->get(items[1].id)->status, Status::pending);
  EXPECT_EQ(store->decide(decision(items[1].id, Action::reject)).status, Status::rejected);
}

TEST_F(StoreTest, ReopenAndReplayAgree) {
  StoreState live;
  {
    auto store = open(StoreOptions{2, false});
    const auto items = three();
    store->submit(items);
    store->decide(decision(items[0].id, Action::approve));
    store->decide(decision(items[1].id, Action::reject, "bob", "typo"));
    live = store->state();
  }
  EXPECT_EQ(replay(dir.path() / "store" / "events.ndjson"), live);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "store" / "snapshot.json"));
  auto reopened = open();
  EXPECT_EQ(reopened->state(), live);
  EXPECT_EQ(StoreState::from_json(live.to_json()), live);
}

TEST_F(StoreTest, TornTailIsDroppedOnOpen) {
  StoreState live;
  {
    auto store = open();
    store->submit(three());
    live = store->state();
  }
  const auto log = dir.path() / "store" / "events.ndjson";
  {
    std::ofstream out(log, std::ios::app | std::ios::binary);
    out << R"({"seq":4,"type":"decision_made","at":"2026-)";
  }
  EXPECT_EQ(replay(log), live);
  auto store = open();
  EXPECT_EQ(store->state(), live);
  store->decide(decision(three()[0].id, Action::approve));
  EXPECT_EQ(replay(log), store->state());
}

TEST_F(StoreTest, CorruptLineIsIntegrityError) {
  {
    auto store = open();
    store->submit(three());
  }
  const auto log = dir.path() / "store" / "events.ndjson";
  std::string body = files::read_file(log);
  body.insert(body.find('\n') + 1, "{not json}\n");
  files::write_atomic(log, body);
  EXPECT_EQ(code_of([&] { replay(log); }), ErrorCode::integrity);
  EXPECT_EQ(code_of([&] { open(); }), ErrorCode::integrity);
}

TEST_F(StoreTest, SecondOpenerIsLockedOut) {
  auto store = open();
  EXPECT_EQ(code_of([&] { open(); }), ErrorCode::config);
  store.reset();
  EXPECT_NO_THROW(open());
}

TEST(StoreFold, RejectsOutOfOrderEvents) {
  StoreState s;
  Event e;
  e.seq = 2;
  e.proposal = three()[0];
  EXPECT_EQ(code_of([&] { apply(s, e); }), ErrorCode::integrity);
  e.seq = 1;
  apply(s, e);
  Event d;
  d.seq = 2;
  d.type = Event::Type::decision_made;
  d.decision = decision("other", Action::reject);
  EXPECT_EQ(code_of([&] { apply(s, d); }), ErrorCode::integrity);
  EXPECT_EQ(Event::from_json(e.to_json()).proposal, e.proposal);
}

// No sequence of operations moves a decided proposal, and replay always
// matches the live state.
TEST_F(StoreTest, RandomOperationsKeepTheStateMachineClosed) {
  std::mt19937_64 rng(31);
  auto store = open(StoreOptions{7, false});
  std::vector<FactProposal> pool;
  for (int i = 0; i < 30; ++i) {
    auto obj = i % 5 == 0 ? ProposalObject::unlinked("name " + std::to_string(i))
                          : ProposalObject::item(kg::EntityId("Q" + std::to_string(100 + i)));
    pool.push_back(sample_proposal("Q" + std::to_string(1 + i % 4), "P69", obj, i));
  }
  std::map<std::string, Status> model;
  for (int step = 0; step < 300; ++step) {
    const auto& p = pool[rng() % pool.size()];
    if (rng() % 2 == 0) {
      store->submit({p});
      model.emplace(p.id, Status::pending);
    } else {
      const Action a = rng() % 2 ? Action::approve : Action::reject;
      const auto it = model.find(p.id);
      try {
        store->decide(decision(p.id, a));
        ASSERT_TRUE(it != model.end() && it->second == Status::pending);
        it->second = a == Action::approve ? Status::approved : Status::rejected;
      } catch (const Error& e) {
        if (it == model.end()) {
          ASSERT_EQ(e.code(), ErrorCode::not_found);
        } else if (it->second != Status::pending) {
          ASSERT_EQ(e.code(), ErrorCode::conflict);
        } else {
          ASSERT_EQ(e.code(), ErrorCode::precondition);
          ASSERT_FALSE(p.object.approvable());
        }
      }
    }
    for (const auto& [id, status] : model) ASSERT_EQ(store->get(id)->status, status);
  }
  EXPECT_EQ(replay(store->log_path()), store->state());
}

// ---- export ----

TEST(Export, DeskadenaStatement) {
  auto p = sample_proposal("Q113585063", "P571", ProposalObject::literal("1997"), 0);
  p.evidence.source_url = "https://www.deskadena.de/";
  p.evidence.retrieved_at = "2022-05-04T10:00:00Z";
  p.id = proposal_id(p);
  p.status = Status::approved;
  p.reviewer = "alice";
  const auto j = export_json({p});
  EXPECT_EQ(j["format"], "webextractor-statements");
  ASSERT_EQ(j["statements"].size(), 1u);
  EXPECT_EQ(j["statements"][0]["subject"], "Q113585063");
  EXPECT_EQ(j["statements"][0]["object"]["value"], "1997");
  EXPECT_EQ(j["statements"][0]["reference"]["url"], "https://www.deskadena.de/");
  EXPECT_EQ(export_quickstatements({p}),
            "# webextractor approved statements: 1\n"
            "Q113585063\tP571\t+1997-00-00T00:00:00Z/9\tS854\t\"https://www.deskadena.de/\"\tS813\t+2022-05-04T00:00:00Z/11\n");
}

TEST(Export, EmptyAndRejected) {
  EXPECT_EQ(export_quickstatements({}), "# webextractor approved statements: 0\n");
  EXPECT_TRUE(export_json({})["statements"].empty());
  auto p = three()[0];
  p.status = Status::rejected;
  EXPECT_TRUE(export_json({p})["statements"].empty());
  EXPECT_EQ(export_quickstatements({p}), "# webextractor approved statements: 0\n");
}

TEST(Export, LiteralValues) {
  EXPECT_EQ(quickstatements_literal("1997"), "+1997-00-00T00:00:00Z/9");
  EXPECT_EQ(quickstatements_literal("2019-03-07"), "+2019-03-07T00:00:00Z/11");
  EXPECT_EQ(quickstatements_literal("42"), "42");
  EXPECT_EQ(quickstatements_literal("-3.5"), "-3.5");
  EXPECT_EQ(quickstatements_literal("say \"hi\""), "\"say 'hi'\"");
  EXPECT_EQ(parse_export_format("qs"), ExportFormat::quickstatements);
  EXPECT_EQ(code_of([] { parse_export_format("csv"); }), ErrorCode::invalid);
}

TEST(Export, EveryLineIsAnApprovedProposal) {
  std::mt19937_64 rng(4);
  std::vector<FactProposal> ps;
  for (int i = 0; i < 60; ++i) {
    auto p = sample_proposal("Q" + std::to_string(1 + rng() % 9), "P" + std::to_string(1 + rng() % 5),
                             ProposalObject::item(kg::EntityId("Q" + std::to_string(100 + i))), i);
    p.status = static_cast<Status>(rng() % 3);
    ps.push_back(p);
  }
  std::set<std::string> approved;
  for (const auto& p : ps) {
    if (p.status == Status::approved) approved.insert(p.subject.str() + "\t" + p.property.str() + "\t" + p.object.value);
  }
  const std::string qs = export_quickstatements(ps);
  std::size_t lines = 0;
  for (const auto& line : text::split(qs, '\n')) {
    if (line.empty() || line[0] == '#') continue;
    const auto cols = text::split(line, '\t');
    ASSERT_TRUE(approved.count(cols[0] + "\t" + cols[1] + "\t" + cols[2])) << line;
    ++lines;
  }
  EXPECT_EQ(lines, approved.size());
  EXPECT_EQ(export_json(ps)["statements"].size(), approved.size());
}

// ---- HTTP ----

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    store = std::make_shared<ProposalStore>(dir.path() / "store", testkit::ticking_clock(), StoreOptions{256, false});
    service = std::make_unique<ProposalService>(store);
    service->start();
    client = std::make_unique<httplib::Client>(service->url());
  }
  void TearDown() override { service->stop(); }

  json post(const std::string& path, const json& body, httplib::Headers headers = {}) {
    auto res = client->Post(path, headers, body.dump(), "application/json");
    EXPECT_TRUE(res);
    last_status = res->status;
    return json::parse(res->body);
  }
  json get(const std::string& path) {
    auto res = client->Get(path);
    EXPECT_TRUE(res);
    last_status = res->status;
    return json::parse(res->body);
  }
  json submit_three() {
    json items = json::array();
    for (const auto& p : three()) items.push_back(to_json(p));
    return post("/proposals", {{"proposals", items}});
  }

  testkit::TempDir dir;
  std::shared_ptr<ProposalStore> store;
  std::unique_ptr<ProposalService> service;
  std::unique_ptr<httplib::Client> client;
  int last_status = 0;
};

TEST_F(ServiceTest, SubmitListGet) {
  const auto r = submit_three();
  EXPECT_EQ(last_status, 200);
  EXPECT_EQ(r["data"]["accepted"], 3);
  const auto again = submit_three();
  EXPECT_EQ(again["data"]["accepted"], 0);
  EXPECT_EQ(again["data"]["duplicates"].size(), 3u);

  const auto pending = get("/proposals?status=pending");
  EXPECT_EQ(pending["data"].size(), 3u);
  EXPECT_FALSE(pending.contains("next_cursor"));

  const auto page = get("/proposals?limit=2");
  ASSERT_EQ(page["data"].size(), 2u);
  const std::string cursor = page["next_cursor"];
  EXPECT_EQ(get("/proposals?limit=2&cursor=" + cursor)["data"].size(), 1u);
  EXPECT_EQ(get("/proposals?subject=Q994013")["data"].size(), 2u);

  const std::string id = three()[0].id;
  const auto one = get("/proposals/" + id);
  EXPECT_EQ(last_status, 200);
  EXPECT_EQ(proposal_from_json(one["data"]).subject.str(), "Q994013");
  EXPECT_EQ(get("/health")["data"]["proposals"], 3);
}

TEST_F(ServiceTest, DecisionsAndErrorEnvelope) {
  submit_three();
  const auto items = three();
  const auto ok = post("/proposals/" + items[0].id + "/decision", {{"action", "approve"}}, {{"X-Reviewer", "carol"}});
  EXPECT_EQ(last_status, 200);
  EXPECT_EQ(ok["data"]["status"], "approved");
  EXPECT_EQ(ok["data"]["reviewer"], "carol");

  const auto conflict = post("/proposals/" + items[0].id + "/decision", {{"action", "reject"}, {"reviewer", "dan"}});
  EXPECT_EQ(last_status, 409);
  EXPECT_EQ(conflict["error"]["code"], "conflict");

  const auto unlinked = post("/proposals/" + items[1].id + "/decision", {{"action", "approve"}, {"reviewer", "dan"}});
  EXPECT_EQ(last_status, 422);
  EXPECT_EQ(unlinked["error"]["code"], "not_approvable");

  post("/proposals/nope/decision", {{"action", "reject"}, {"reviewer", "dan"}});
  EXPECT_EQ(last_status, 404);
  get("/proposals/nope");
  EXPECT_EQ(last_status, 404);

  const auto bad_action = post("/proposals/" + items[2].id + "/decision", {{"action", "maybe"}, {"reviewer", "dan"}});
  EXPECT_EQ(last_status, 400);
  EXPECT_EQ(bad_action["error"]["code"], "invalid");
  post("/proposals/" + items[2].id + "/decision", {{"action", "reject"}});
  EXPECT_EQ(last_status, 400);  // no reviewer anywhere

  auto res = client->Post("/proposals", "{oops", "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["error"]["code"], "invalid");
  get("/proposals?limit=abc");
  EXPECT_EQ(last_status, 400);
  get("/proposals?status=done");
  EXPECT_EQ(last_status, 400);
}

TEST_F(ServiceTest, PerItemRejectionsKeepRequestPositions) {
  json items = json::array();
  items.push_back({{"subject", "Q1"}});  // does not parse
  auto approved = three()[0];
  approved.status = Status::approved;
  items.push_back(to_json(approved));
  items.push_back(to_json(three()[2]));
  const auto r = post("/proposals", items);
  EXPECT_EQ(last_status, 200);
  EXPECT_EQ(r["data"]["accepted"], 1);
  ASSERT_EQ(r["data"]["rejected"].size(), 2u);
  EXPECT_EQ(r["data"]["rejected"][0]["index"], 0);
  EXPECT_EQ(r["data"]["rejected"][1]["index"], 1);
}

TEST_F(ServiceTest, Export) {
  submit_three();
  EXPECT_EQ(get("/export")["data"]["statements"].size(), 0u);
  post("/proposals/" + three()[2].id + "/decision", {{"action", "approve"}, {"reviewer", "erin"}});
  const auto j = get("/export?format=json");
  ASSERT_EQ(j["data"]["statements"].size(), 1u);
  EXPECT_EQ(j["data"]["statements"][0]["reviewer"], "erin");
  const std::string qs = get("/export?format=quickstatements")["data"];
  EXPECT_EQ(qs.rfind("# webextractor approved statements: 1\nQ5\tP569\t+1997-00-00T00:00:00Z/9", 0), 0u);
  get("/export?format=xml");
  EXPECT_EQ(last_status, 400);
}

TEST(HttpErrorMapping, Codes) {
  EXPECT_EQ(http_error_for(Error(ErrorCode::invalid, "")), std::make_pair(400, std::string("invalid")));
  EXPECT_EQ(http_error_for(Error(ErrorCode::not_found, "")), std::make_pair(404, std::string("not_found")));
  EXPECT_EQ(http_error_for(Error(ErrorCode::conflict, "")), std::make_pair(409, std::string("conflict")));
  EXPECT_EQ(http_error_for(Error(ErrorCode::precondition, "")), std::make_pair(422, std::string("not_approvable")));
  EXPECT_EQ(http_error_for(Error(ErrorCode::integrity, "")).first, 500);
}
