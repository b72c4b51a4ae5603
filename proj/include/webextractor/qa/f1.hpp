#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "webextractor/dataset/dataset.hpp"
#include "webextractor/qa/extractor.hpp"

namespace wex::qa {

// SQuAD answer normalization: lower-case, drop ASCII punctuation, drop the
// articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);
std::vector<std::string> answer_tokens(std::string_view s);

// Token-overlap F1 in [0, 1]. Two empty answers score 1, one empty scores 0.
double token_f1(std::string_view prediction, std::string_view gold);
double max_token_f1(std::string_view prediction, const std::vector<std::string>& golds);

struct F1Report {
  double mean = 0.0;  // in [0, 100]
  std::size_t count = 0;
  std::map<std::string, double> per_example;  // id -> [0, 100]
};

// Predictions must cover every gold id exactly once; evaluation error
// otherwise, listing missing and extra ids.
F1Report evaluate_f1(const std::vector<SpanPrediction>& predictions,
                     const std::vector<dataset::QAExample>& gold);

}  // namespace wex::qa
