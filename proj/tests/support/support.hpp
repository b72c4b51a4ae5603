#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "webextractor/crawl/snapshot.hpp"
#include "webextractor/kg/graph.hpp"
#include "webextractor/review/proposal.hpp"

namespace wex::testkit {

std::filesystem::path source_dir();
std::filesystem::path data_dir();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

// Copies the bundled fixture (config, KG, pages, stats, rules) into dir,
// leaving out any work directory. Returns the copied config path.
std::filesystem::path copy_fixture(const std::filesystem::path& dir);

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

// Runs the built webextractor binary with the given arguments.
CliResult run_cli(const std::string& args);

// ---- knowledge graph fixtures ----

struct EntitySpec {
  std::string id;
  std::string label;
  std::vector<std::string> aliases;
  std::map<std::string, std::vector<std::string>> items;     // property -> item ids
  std::map<std::string, std::vector<std::string>> literals;  // property -> values
  std::map<std::string, std::string> external_ids;
};

nlohmann::json entity_line(const EntitySpec& e);
nlohmann::json property_line(const std::string& id, const std::string& label, const std::string& datatype,
                             std::vector<std::string> aliases = {}, const std::string& formatter = {});

std::shared_ptr<kg::KnowledgeGraph> make_kg(const std::vector<nlohmann::json>& lines);

// Three entities named Oxford (university, city, football club) and two
// alumni educated at the university.
std::vector<nlohmann::json> oxford_fixture();

// The bundled data/kg.ndjson.
std::shared_ptr<kg::KnowledgeGraph> bundled_kg();

// ---- random HTML ----

struct RandomHtml {
  std::string html;
  std::vector<std::string> removed_bodies;  // script/style contents and img alt text
};

RandomHtml random_html(std::mt19937_64& rng);

// ---- F1 oracle ----

// Token-multiset overlap F1 in [0, 100], maximized over golds, written from
// the SQuAD rules without sharing code with the library.
double oracle_f1(const std::string& prediction, const std::vector<std::string>& golds);

// ---- planted distant-supervision corpus ----

struct PlantedCorpus {
  std::vector<nlohmann::json> kg_lines;
  std::vector<kg::Triple> triples;
  std::map<std::string, crawl::PageSnapshot> pages;  // url -> snapshot
  std::size_t planted_mentions = 0;                  // visible mentions only
  std::size_t hidden_mentions = 0;                   // inside script/style, must not count
  kg::ExternalIdentifier domain;
  kg::PropertyId property;
};

PlantedCorpus planted_corpus(std::size_t pages, std::uint64_t seed);

// ---- linking ----

// A property whose gold objects all carry one marker neighbor while every
// same-named confusable carries another; shared noise neighbors appear on
// both sides. Each gold has a unique name and 2 to 5 confusables.
struct SeparableKg {
  struct Case {
    kg::EntityId subject;
    kg::EntityId gold;
    std::string name;
    std::size_t confusables = 0;
  };
  std::vector<nlohmann::json> lines;
  kg::PropertyId property;
  kg::EntityId gold_marker;
  kg::EntityId confusable_marker;
  std::vector<Case> cases;
};

SeparableKg separable_kg(std::size_t golds, std::uint64_t seed);

// ---- proposals ----

// A well-formed pending proposal; `salt` varies the evidence location.
review::FactProposal sample_proposal(const std::string& subject, const std::string& property,
                                     review::ProposalObject object, int salt = 0);

// Deterministic clock starting at 2026-01-01T00:00:00Z, one second per call.
std::function<TimePoint()> ticking_clock();

}  // namespace wex::testkit
