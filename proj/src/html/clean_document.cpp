#include "webextractor/html/clean_document.hpp"

#include <nlohmann/json.hpp>

#include "webextractor/error.hpp"
#include "webextractor/util/digest.hpp"
#include "webextractor/util/text.hpp"

namespace wex::html {

using nlohmann::json;

std::string_view segment_kind_name(OffsetSegment::Kind kind) {
  switch (kind) {
    case OffsetSegment::Kind::exact: return "exact";
    case OffsetSegment::Kind::atomic: return "atomic";
    case OffsetSegment::Kind::markup: return "markup";
  }
  return "exact";
}

namespace {

OffsetSegment::Kind parse_kind(const std::string& s) {
  if (s == "exact") return OffsetSegment::Kind::exact;
  if (s == "atomic") return OffsetSegment::Kind::atomic;
  if (s == "markup") return OffsetSegment::Kind::markup;
  fail(ErrorCode::invalid, "unknown offset segment kind: " + s);
}

}  // namespace

CleanDocument::CleanDocument(std::string text, std::vector<OffsetSegment> offset_map, std::string source_url,
                             std::string source_hash, std::string encoding)
    : text_(std::move(text)),
      offset_map_(std::move(offset_map)),
      source_url_(std::move(source_url)),
      source_hash_(std::move(source_hash)),
      encoding_(std::move(encoding)) {
  index();
}

void CleanDocument::index() {
  cp_offsets_ = text::code_point_offsets(text_);
  const std::size_t n = length();
  std::size_t clean_prev = 0;
  const OffsetSegment* prev = nullptr;
  for (const auto& seg : offset_map_) {
    require(seg.clean.first < seg.clean.second && seg.clean.second <= n, ErrorCode::invalid,
            "offset segment outside the text");
    require(seg.raw.first <= seg.raw.second, ErrorCode::invalid, "inverted raw range");
    // A self-closing tag yields two markup tokens sharing one raw range.
    const bool shared_tag = prev && prev->kind == OffsetSegment::Kind::markup &&
                            seg.kind == OffsetSegment::Kind::markup && prev->raw == seg.raw;
    require(seg.clean.first >= clean_prev && (!prev || shared_tag || seg.raw.first >= prev->raw.second),
            ErrorCode::invalid, "offset map not sorted or overlapping");
    clean_prev = seg.clean.second;
    prev = &seg;
  }
}

std::string CleanDocument::substr(Range clean) const {
  require(clean.first <= clean.second && clean.second <= length(), ErrorCode::precondition,
          "clean range out of bounds");
  return text_.substr(cp_offsets_[clean.first], cp_offsets_[clean.second] - cp_offsets_[clean.first]);
}

std::vector<Range> CleanDocument::visible_runs() const {
  std::vector<Range> runs;
  bool open = false;
  for (const auto& seg : offset_map_) {
    if (!seg.is_text()) {
      open = false;
      continue;
    }
    if (open) {
      runs.back().second = seg.clean.second;
    } else {
      runs.push_back(seg.clean);
      open = true;
    }
  }
  return runs;
}

std::string CleanDocument::visible_text() const {
  std::string out;
  for (const auto& run : visible_runs()) {
    if (!out.empty()) out.push_back(' ');
    out += substr(run);
  }
  return out;
}

json CleanDocument::to_json() const {
  json map = json::array();
  for (const auto& seg : offset_map_) {
    map.push_back(json::array({json::array({seg.clean.first, seg.clean.second}),
                               json::array({seg.raw.first, seg.raw.second}), segment_kind_name(seg.kind)}));
  }
  return json{{"text", text_},
              {"offset_map", std::move(map)},
              {"source_url", source_url_},
              {"source_hash", source_hash_},
              {"encoding", encoding_}};
}

CleanDocument CleanDocument::from_json(const json& j) {
  try {
    std::vector<OffsetSegment> map;
    for (const auto& e : j.at("offset_map")) {
      require(e.is_array() && e.size() == 3, ErrorCode::invalid, "offset map entry must be a triple");
      OffsetSegment seg;
      seg.clean = {e[0].at(0).get<std::size_t>(), e[0].at(1).get<std::size_t>()};
      seg.raw = {e[1].at(0).get<std::size_t>(), e[1].at(1).get<std::size_t>()};
      seg.kind = parse_kind(e[2].get<std::string>());
      map.push_back(seg);
    }
    return CleanDocument(j.at("text").get<std::string>(), std::move(map), j.value("source_url", ""),
                         j.at("source_hash").get<std::string>(), j.value("encoding", "utf-8"));
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid, std::string("malformed clean document: ") + e.what());
  }
}

ProjectedSpan project_span(const CleanDocument& doc, std::string_view raw_html, Range clean) {
  require(sha256_hex(raw_html) == doc.source_hash(), ErrorCode::integrity,
          "raw HTML does not match the document's source hash");
  require(clean.first <= clean.second && clean.second <= doc.length(), ErrorCode::precondition,
          "clean range out of bounds");
  // Raw byte position of clean offset pos inside a text segment.
  auto raw_at = [&](const OffsetSegment& seg, std::size_t pos, bool is_end) {
    if (seg.kind == OffsetSegment::Kind::exact) {
      return seg.raw.first + doc.substr({seg.clean.first, pos}).size();
    }
    return is_end ? seg.raw.second : seg.raw.first;
  };
  const auto& map = doc.offset_map();
  if (clean.first == clean.second) {
    for (const auto& seg : map) {
      if (seg.is_text() && seg.clean.second > clean.first) {
        const std::size_t p = seg.clean.first >= clean.first ? seg.raw.first : raw_at(seg, clean.first, false);
        return {{p, p}, {}};
      }
    }
    return {{raw_html.size(), raw_html.size()}, {}};
  }
  const OffsetSegment* first = nullptr;
  const OffsetSegment* last = nullptr;
  for (const auto& seg : map) {
    if (!seg.is_text() || seg.clean.second <= clean.first) continue;
    if (seg.clean.first >= clean.second) break;
    if (!first) first = &seg;
    last = &seg;
  }
  require(first != nullptr, ErrorCode::not_projectable, "range covers no visible text");
  const std::size_t b = raw_at(*first, std::max(clean.first, first->clean.first), false);
  const std::size_t e = raw_at(*last, std::min(clean.second, last->clean.second), true);
  require(e <= raw_html.size(), ErrorCode::integrity, "offset map exceeds raw HTML");
  return {{b, e}, std::string(raw_html.substr(b, e - b))};
}

}  // namespace wex::html
