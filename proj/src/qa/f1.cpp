#include "webextractor/qa/f1.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "webextractor/error.hpp"
#include "webextractor/util/text.hpp"

namespace wex::qa {

namespace {

bool is_ascii_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

bool word_at(const std::u32string& s, std::size_t i) { return i < s.size() && text::is_word_char(s[i]); }

}  // namespace

std::string normalize_answer(std::string_view s) {
  std::u32string chars;
  for (char32_t c : text::to_utf32(s)) {
    c = text::simple_lower(c);
    if (!is_ascii_punct(c)) chars.push_back(c);
  }
  // \b(a|an|the)\b -> " "
  std::u32string no_articles;
  for (std::size_t i = 0; i < chars.size();) {
    const bool boundary_before = i == 0 || !text::is_word_char(chars[i - 1]);
    std::size_t len = 0;
    if (boundary_before) {
      for (std::u32string_view art : {U"the", U"an", U"a"}) {
        if (chars.compare(i, art.size(), art) == 0 && !word_at(chars, i + art.size())) {
          len = art.size();
          break;
        }
      }
    }
    if (len > 0) {
      no_articles.push_back(U' ');
      i += len;
    } else {
      no_articles.push_back(chars[i++]);
    }
  }
  return text::collapse_whitespace(text::to_utf8(no_articles));
}

std::vector<std::string> answer_tokens(std::string_view s) {
  const std::string norm = normalize_answer(s);
  if (norm.empty()) return {};
  return text::split(norm, ' ');
}

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto p = answer_tokens(prediction);
  const auto g = answer_tokens(gold);
  if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : g) ++counts[t];
  int same = 0;
  for (const auto& t : p) {
    if (auto it = counts.find(t); it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  // 2PR/(P+R) reduced to one division
  return 2.0 * same / static_cast<double>(p.size() + g.size());
}

double max_token_f1(std::string_view prediction, const std::vector<std::string>& golds) {
  if (golds.empty()) return token_f1(prediction, "");
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(prediction, g));
  return best;
}

F1Report evaluate_f1(const std::vector<SpanPrediction>& predictions, const std::vector<dataset::QAExample>& gold) {
  std::map<std::string, const SpanPrediction*> by_id;
  std::set<std::string> duplicated;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.id, &p).second) duplicated.insert(p.id);
  }
  std::set<std::string> gold_ids;
  std::vector<std::string> missing;
  for (const auto& e : gold) {
    gold_ids.insert(e.id);
    if (!by_id.count(e.id)) missing.push_back(e.id);
  }
  std::vector<std::string> extra;
  for (const auto& [id, p] : by_id) {
    if (!gold_ids.count(id)) extra.push_back(id);
  }
  if (!missing.empty() || !extra.empty() || !duplicated.empty() || gold_ids.size() != gold.size()) {
    auto list = [](const auto& ids) {
      std::vector<std::string> v(ids.begin(), ids.end());
      if (v.size() > 10) {
        v.resize(10);
        v.push_back("...");
      }
      return text::join(v, ",");
    };
    fail(ErrorCode::evaluation, "prediction ids do not match gold ids; missing=[" + list(missing) + "] extra=[" +
                                    list(extra) + "] duplicated=[" + list(duplicated) + "]");
  }
  F1Report report;
  double sum = 0.0;
  for (const auto& e : gold) {
    std::vector<std::string> golds;
    for (const auto& a : e.answers) golds.push_back(a.text);
    const double f = 100.0 * max_token_f1(by_id.at(e.id)->text, golds);
    report.per_example[e.id] = f;
    sum += f;
  }
  report.count = gold.size();
  report.mean = gold.empty() ? 0.0 : sum / static_cast<double>(gold.size());
  return report;
}

}  // namespace wex::qa
