#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace wex::html {

using Range = std::pair<std::size_t, std::size_t>;  // half-open

// One entry of the offset map. Clean offsets count code points of
// CleanDocument::text; raw offsets count bytes of the source HTML.
struct OffsetSegment {
  enum class Kind {
    exact,   // clean chars equal the raw bytes, position by position
    atomic,  // clean chars derived from the whole raw range (entity, NFC composition, collapsed space)
    markup,  // a synthetic or kept-tag token
  };
  Range clean;
  Range raw;
  Kind kind = Kind::exact;

  bool is_text() const { return kind != Kind::markup; }
  bool operator==(const OffsetSegment&) const = default;
};

std::string_view segment_kind_name(OffsetSegment::Kind kind);

struct ProjectedSpan {
  Range raw;
  std::string raw_text;
};

// Normalized token stream of one page. Immutable once built.
class CleanDocument {
 public:
  CleanDocument() = default;
  CleanDocument(std::string text, std::vector<OffsetSegment> offset_map, std::string source_url,
                std::string source_hash, std::string encoding = "utf-8");

  const std::string& text() const { return text_; }
  const std::vector<OffsetSegment>& offset_map() const { return offset_map_; }
  const std::string& source_url() const { return source_url_; }
  const std::string& source_hash() const { return source_hash_; }
  const std::string& encoding() const { return encoding_; }

  std::size_t length() const { return cp_offsets_.size() - 1; }  // in code points
  std::string substr(Range clean) const;

  // Maximal clean ranges holding text only (no markup token inside).
  std::vector<Range> visible_runs() const;
  // Visible runs joined by a single space.
  std::string visible_text() const;

  nlohmann::json to_json() const;
  static CleanDocument from_json(const nlohmann::json& j);

 private:
  void index();

  std::string text_;
  std::vector<OffsetSegment> offset_map_;
  std::string source_url_;
  std::string source_hash_;
  std::string encoding_ = "utf-8";
  std::vector<std::size_t> cp_offsets_{0};
};

// Raw byte range behind a clean range. The raw HTML must hash to the
// document's source_hash (integrity error otherwise). Empty range gives an
// empty raw range; a range touching no text segment is not projectable.
ProjectedSpan project_span(const CleanDocument& doc, std::string_view raw_html, Range clean);

}  // namespace wex::html
