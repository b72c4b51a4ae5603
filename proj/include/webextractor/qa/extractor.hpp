#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "webextractor/html/clean_document.hpp"

namespace wex::qa {

struct ExtractionQuery {
  std::string id;
  std::string question;
  std::shared_ptr<const html::CleanDocument> context;

  // Precondition error on an empty question or context.
  void validate() const;
};

struct SpanPrediction {
  std::string id;
  std::size_t start = 0;  // code points into the context text
  std::size_t end = 0;
  std::string text;
  double score = 0.0;

  bool empty() const { return start == end; }
  nlohmann::json to_json() const;
};

// Contract every extraction backend implements. Predictions come back in
// query order; calls may be concurrent.
class ExtractorBackend {
 public:
  virtual ~ExtractorBackend() = default;
  virtual std::vector<SpanPrediction> extract_batch(std::span<const ExtractionQuery> queries) = 0;
  virtual std::string descriptor() const = 0;
};

// Protocol error unless start <= end <= len(context), text is that
// substring, the score lies in [0, 1] and the id matches.
void check_prediction(const ExtractionQuery& query, const SpanPrediction& prediction);

SpanPrediction extract(const ExtractionQuery& query, ExtractorBackend& backend);

// Validated batch call; protocol error when the reply count differs.
std::vector<SpanPrediction> extract_all(std::span<const ExtractionQuery> queries, ExtractorBackend& backend);

enum class QuestionMode { best_score, first_question };
QuestionMode parse_question_mode(std::string_view s);

// One prediction for a fact slot asked with several phrasings: the highest
// scoring span (earliest question on ties), or the first question's answer.
SpanPrediction predict_with_questions(const std::string& id, const std::vector<std::string>& questions,
                                      std::shared_ptr<const html::CleanDocument> context,
                                      ExtractorBackend& backend, QuestionMode mode = QuestionMode::best_score);

}  // namespace wex::qa
