#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "webextractor/crawl/snapshot.hpp"
#include "webextractor/html/clean_document.hpp"
#include "webextractor/html/normalizer.hpp"
#include "webextractor/kg/graph.hpp"

namespace wex::dataset {

enum class QuestionSources { labels, labels_and_aliases };

QuestionSources parse_question_sources(std::string_view s);

// "<name> ?" for each trimmed name, labels first, duplicates removed.
// Precondition error when the property has no label.
std::vector<std::string> formulate_questions(const kg::PropertyInfo& property,
                                             QuestionSources sources = QuestionSources::labels_and_aliases);

struct Answer {
  std::size_t start = 0;  // clean code point offsets
  std::size_t end = 0;
  std::string text;

  friend bool operator==(const Answer&, const Answer&) = default;
};

enum class Split { none, train, test };
std::string_view split_name(Split s);

struct QAExample {
  std::string id;       // unit_id + "-q" + question index
  std::string unit_id;  // stable hash of (url, property, object)
  std::string question;
  std::shared_ptr<const html::CleanDocument> context;
  std::vector<Answer> answers;
  kg::Triple source_triple;
  kg::PropertyId domain;  // the external identifier that led to the page
  std::string url;
  Split split = Split::none;
};

// Case-insensitive, word-bounded, non-overlapping occurrences of name inside
// the document's visible runs, in order.
std::vector<Answer> find_mentions(const html::CleanDocument& doc, std::string_view name);

using SnapshotLookup = std::function<std::optional<crawl::PageSnapshot>(const std::string& url)>;

struct GenerationStats {
  std::size_t triples = 0;
  std::size_t duplicates = 0;
  std::size_t missing_snapshot = 0;
  std::size_t no_mention = 0;
  std::size_t units = 0;
  std::size_t examples = 0;

  nlohmann::json to_json() const;
};

struct GenerationResult {
  std::vector<QAExample> examples;  // sorted by id
  GenerationStats stats;
};

struct GenerationOptions {
  QuestionSources question_sources = QuestionSources::labels_and_aliases;
  html::TagPolicy tag_policy;
};

// Distant supervision: one example per question for every triple whose
// object is mentioned on the subject's page. All mentions of the longest
// mentioned name are gold answers.
GenerationResult generate_examples(const kg::KnowledgeGraph& kg, const kg::ExternalIdentifier& x,
                                   const kg::PropertyId& p, const std::vector<kg::Triple>& triples,
                                   const SnapshotLookup& snapshots, const GenerationOptions& options = {});

struct GroupKey {
  std::string domain;
  std::string property;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
  std::string str() const { return domain + "/" + property; }
};

struct GroupSplit {
  std::vector<QAExample> train;
  std::vector<QAExample> test;
  std::size_t units = 0;
  std::size_t discarded_units = 0;  // left out to keep URLs on one side
};

struct DatasetSplit {
  std::map<GroupKey, GroupSplit> groups;
  std::map<GroupKey, std::size_t> excluded;  // group -> unit count
};

// Sizes count units (facts); all questions of a unit share its side, and a
// context URL never lands on both sides of a group.
DatasetSplit split_dataset(const std::vector<QAExample>& examples, std::size_t train_units = 500,
                           std::size_t test_units = 500, std::uint64_t seed = 0);

struct BudgetSpec {
  std::vector<std::size_t> budgets{0, 8, 16, 32, 64, 128, 256, 384, 500};

  static const std::vector<std::size_t>& grid();
  // Config error unless sorted ascending with values from the grid.
  void validate() const;
  static BudgetSpec parse(std::string_view csv);
};

// Nested prefixes of one seeded unit order. Precondition error naming the
// group when a budget exceeds the available units.
std::map<std::size_t, std::vector<QAExample>> budget_subsets(const std::vector<QAExample>& train,
                                                             const BudgetSpec& spec, std::uint64_t seed,
                                                             const std::string& group_name = {});

// ---- files ----

nlohmann::json example_to_json(const QAExample& e);
// SQuAD-shaped line: {id, question, context, answers: {text[], answer_start[]}}
nlohmann::json example_to_squad(const QAExample& e);

struct ExportSummary {
  std::size_t files = 0;
  nlohmann::json manifest;
};

// Writes {out}/{domain}/{property}/{train,test,budget_K}.jsonl plus .squad.jsonl
// twins, {out}/contexts/<source_hash>.json and {out}/manifest.json.
ExportSummary export_dataset(const std::filesystem::path& out, const DatasetSplit& split, const BudgetSpec& spec,
                             std::uint64_t seed, const std::map<GroupKey, GenerationStats>& stats);

// Reads a .jsonl written by export_dataset, resolving contexts next to it.
std::vector<QAExample> load_examples(const std::filesystem::path& jsonl, const std::filesystem::path& contexts_dir);

}  // namespace wex::dataset
