#include "webextractor/qa/extractor.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/text.hpp"

namespace wex::qa {

void ExtractionQuery::validate() const {
  require(!text::trim(question).empty(), ErrorCode::precondition, "query " + id + ": empty question");
  require(context && !context->text().empty(), ErrorCode::precondition, "query " + id + ": empty context");
}

nlohmann::json SpanPrediction::to_json() const {
  return {{"id", id}, {"start", start}, {"end", end}, {"text", text}, {"score", score}};
}

void check_prediction(const ExtractionQuery& query, const SpanPrediction& p) {
  const std::string where = "query " + query.id + ": ";
  require(p.id == query.id, ErrorCode::protocol, where + "reply carries id '" + p.id + "'");
  require(p.start <= p.end, ErrorCode::protocol, where + "span start after end");
  require(p.end <= query.context->length(), ErrorCode::protocol, where + "span end beyond the context");
  require(std::isfinite(p.score) && p.score >= 0.0 && p.score <= 1.0, ErrorCode::protocol,
          where + "score outside [0, 1]");
  require(query.context->substr({p.start, p.end}) == p.text, ErrorCode::protocol,
          where + "span text differs from the context substring");
}

std::vector<SpanPrediction> extract_all(std::span<const ExtractionQuery> queries, ExtractorBackend& backend) {
  for (const auto& q : queries) q.validate();
  if (queries.empty()) return {};
  std::vector<SpanPrediction> out = backend.extract_batch(queries);
  require(out.size() == queries.size(), ErrorCode::protocol,
          backend.descriptor() + " returned " + std::to_string(out.size()) + " predictions for " +
              std::to_string(queries.size()) + " queries");
  for (std::size_t i = 0; i < out.size(); ++i) check_prediction(queries[i], out[i]);
  return out;
}

SpanPrediction extract(const ExtractionQuery& query, ExtractorBackend& backend) {
  return extract_all(std::span<const ExtractionQuery>(&query, 1), backend).front();
}

QuestionMode parse_question_mode(std::string_view s) {
  if (s == "best_score") return QuestionMode::best_score;
  if (s == "first_question") return QuestionMode::first_question;
  fail(ErrorCode::config, "question mode must be best_score or first_question, got '" + std::string(s) + "'");
}

SpanPrediction predict_with_questions(const std::string& id, const std::vector<std::string>& questions,
                                      std::shared_ptr<const html::CleanDocument> context,
                                      ExtractorBackend& backend, QuestionMode mode) {
  require(!questions.empty(), ErrorCode::precondition, "no questions for " + id);
  const std::size_t n = mode == QuestionMode::first_question ? 1 : questions.size();
  std::vector<ExtractionQuery> queries;
  for (std::size_t i = 0; i < n; ++i) queries.push_back({id + "#" + std::to_string(i), questions[i], context});
  auto preds = extract_all(queries, backend);
  std::size_t best = 0;
  for (std::size_t i = 1; i < preds.size(); ++i) {
    if (preds[i].score > preds[best].score) best = i;
  }
  SpanPrediction p = preds[best];
  p.id = id;
  return p;
}

}  // namespace wex::qa
