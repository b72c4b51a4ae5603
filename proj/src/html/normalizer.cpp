#include "webextractor/html/normalizer.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>

#include "webextractor/error.hpp"
#include "webextractor/util/digest.hpp"
#include "webextractor/util/text.hpp"

namespace wex::html {

void TagPolicy::validate() const {
  for (const auto& t : kept_tags) {
    require(!removed_tags.count(t), ErrorCode::config, "tag is both kept and removed: " + t);
  }
  require(!boundary_open_token.empty() && !boundary_close_token.empty(), ErrorCode::config,
          "boundary tokens must be non-empty");
}

namespace {

struct CleanChar {
  char32_t c;
  std::size_t raw_begin;
  std::size_t raw_end;
  bool verbatim;
};

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  require(U_SUCCESS(status) && n != nullptr, ErrorCode::config, "ICU NFC normalizer unavailable");
  return *n;
}

std::vector<CleanChar> decode_text(const HtmlDocument& doc, const Node& node) {
  const DecodedInput& in = doc.input();
  const std::u32string_view chars = std::u32string_view(in.chars).substr(0, node.span.second);
  std::vector<CleanChar> out;
  out.reserve(node.span.second - node.span.first);
  for (std::size_t i = node.span.first; i < node.span.second;) {
    if (!node.raw_text && chars[i] == '&') {
      const CharRef ref = match_char_ref(chars, i);
      if (ref.length > 0) {
        for (char32_t c : ref.value) out.push_back({c, in.raw_begin[i], in.raw_end[i + ref.length - 1], false});
        i += ref.length;
        continue;
      }
    }
    out.push_back({chars[i], in.raw_begin[i], in.raw_end[i], in.verbatim[i]});
    ++i;
  }
  return out;
}

// NFC applied per normalization chunk; a chunk that changes maps as a unit
// to the union of its raw ranges.
std::vector<CleanChar> compose(std::vector<CleanChar> chars) {
  if (std::all_of(chars.begin(), chars.end(), [](const CleanChar& c) { return c.c < 0x300; })) return chars;
  const icu::Normalizer2& nfc = nfc_instance();
  std::vector<CleanChar> out;
  out.reserve(chars.size());
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (end <= start) return;
    icu::UnicodeString chunk;
    for (std::size_t k = start; k < end; ++k) chunk.append(static_cast<UChar32>(chars[k].c));
    UErrorCode status = U_ZERO_ERROR;
    if (nfc.isNormalized(chunk, status) && U_SUCCESS(status)) {
      out.insert(out.end(), chars.begin() + static_cast<std::ptrdiff_t>(start),
                 chars.begin() + static_cast<std::ptrdiff_t>(end));
      return;
    }
    status = U_ZERO_ERROR;
    const icu::UnicodeString composed = nfc.normalize(chunk, status);
    require(U_SUCCESS(status), ErrorCode::invalid, "NFC normalization failed");
    std::size_t rb = chars[start].raw_begin;
    std::size_t re = chars[start].raw_end;
    for (std::size_t k = start; k < end; ++k) {
      rb = std::min(rb, chars[k].raw_begin);
      re = std::max(re, chars[k].raw_end);
    }
    for (int32_t k = 0; k < composed.length();) {
      const UChar32 c = composed.char32At(k);
      out.push_back({static_cast<char32_t>(c), rb, re, false});
      k += U16_LENGTH(c);
    }
  };
  for (std::size_t k = 1; k < chars.size(); ++k) {
    if (nfc.hasBoundaryBefore(static_cast<UChar32>(chars[k].c))) {
      flush(k);
      start = k;
    }
  }
  flush(chars.size());
  return out;
}

// Whitespace runs become one space anchored at the run's first character;
// leading and trailing whitespace is dropped.
std::vector<CleanChar> collapse(const std::vector<CleanChar>& chars) {
  std::vector<CleanChar> out;
  out.reserve(chars.size());
  for (std::size_t k = 0; k < chars.size();) {
    if (!text::is_space(chars[k].c)) {
      out.push_back(chars[k++]);
      continue;
    }
    std::size_t e = k;
    while (e < chars.size() && text::is_space(chars[e].c)) ++e;
    if (!out.empty() && e < chars.size()) {
      const bool single = e - k == 1 && chars[k].c == ' ' && chars[k].verbatim;
      out.push_back({U' ', chars[k].raw_begin, chars[k].raw_end, single});
    }
    k = e;
  }
  return out;
}

class Emitter {
 public:
  void markup(std::string_view token, std::pair<std::size_t, std::size_t> raw) {
    separate();
    const std::size_t begin = length_;
    append(text::to_utf32(token));
    segments_.push_back({{begin, length_}, raw, OffsetSegment::Kind::markup});
  }

  void text_chunk(const std::vector<CleanChar>& chars) {
    if (chars.empty()) return;
    separate();
    OffsetSegment* cur = nullptr;
    for (const CleanChar& c : chars) {
      const std::size_t pos = length_;
      text::append_utf8(text_, c.c);
      ++length_;
      if (cur && c.verbatim && cur->kind == OffsetSegment::Kind::exact && cur->raw.second == c.raw_begin) {
        cur->clean.second = length_;
        cur->raw.second = c.raw_end;
        continue;
      }
      if (cur && !c.verbatim && cur->kind == OffsetSegment::Kind::atomic && cur->raw.first == c.raw_begin &&
          cur->raw.second == c.raw_end) {
        cur->clean.second = length_;
        continue;
      }
      segments_.push_back({{pos, length_},
                           {c.raw_begin, c.raw_end},
                           c.verbatim ? OffsetSegment::Kind::exact : OffsetSegment::Kind::atomic});
      cur = &segments_.back();
    }
  }

  std::string take_text() { return std::move(text_); }
  std::vector<OffsetSegment> take_segments() { return std::move(segments_); }

 private:
  void separate() {
    if (length_ == 0) return;
    text_.push_back(' ');
    ++length_;
  }
  void append(const std::u32string& s) {
    for (char32_t c : s) text::append_utf8(text_, c);
    length_ += s.size();
  }

  std::string text_;
  std::size_t length_ = 0;
  std::vector<OffsetSegment> segments_;
};

}  // namespace

CleanDocument normalize(const Subtree& subtree, const TagPolicy& policy, const SourceInfo& source) {
  policy.validate();
  const HtmlDocument& doc = *subtree.doc;
  Emitter emit;
  // (node, closing) pairs; children pushed in reverse.
  std::vector<std::pair<std::size_t, bool>> todo;
  const Node& top = doc.node(subtree.node);
  for (auto it = top.children.rbegin(); it != top.children.rend(); ++it) todo.emplace_back(*it, false);
  while (!todo.empty()) {
    const auto [id, closing] = todo.back();
    todo.pop_back();
    const Node& n = doc.node(id);
    if (n.kind == Node::Kind::comment || n.kind == Node::Kind::document) continue;
    if (n.kind == Node::Kind::text) {
      emit.text_chunk(collapse(compose(decode_text(doc, n))));
      continue;
    }
    if (policy.removed_tags.count(n.name)) continue;
    const bool kept = policy.kept_tags.count(n.name) > 0;
    if (closing) {
      const auto raw = doc.raw_range(n.close_tag ? *n.close_tag : n.span);
      emit.markup(kept ? "</" + n.name + ">" : policy.boundary_close_token, raw);
      continue;
    }
    emit.markup(kept ? "<" + n.name + ">" : policy.boundary_open_token, doc.raw_range(n.span));
    if (n.closed()) todo.emplace_back(id, true);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) todo.emplace_back(*it, false);
  }
  return CleanDocument(emit.take_text(), emit.take_segments(), source.url, sha256_hex(doc.raw()),
                       doc.input().encoding);
}

CleanDocument normalize(std::string_view raw_html, const TagPolicy& policy, const SourceInfo& source) {
  return normalize(extract_body(raw_html, source.content_type), policy, source);
}

CleanDocument parse_clean_text(std::string_view text_in, const TagPolicy& policy, std::string source_url) {
  policy.validate();
  const std::string text(text_in);
  auto is_markup = [&](std::string_view tok) {
    if (tok == policy.boundary_open_token || tok == policy.boundary_close_token) return true;
    if (tok.size() < 3 || tok.front() != '<' || tok.back() != '>') return false;
    std::string_view name = tok.substr(1, tok.size() - 2);
    if (!name.empty() && name.front() == '/') name.remove_prefix(1);
    return policy.kept_tags.count(name) > 0;
  };
  const std::u32string chars = text::to_utf32(text);
  const std::vector<std::size_t> bytes = text::code_point_offsets(text);
  std::vector<OffsetSegment> segments;
  std::size_t gap_begin = 0;
  auto flush_gap = [&](std::size_t end) {
    std::size_t b = gap_begin;
    std::size_t e = end;
    while (b < e && text::is_space(chars[b])) ++b;
    while (e > b && text::is_space(chars[e - 1])) --e;
    if (b < e) segments.push_back({{b, e}, {bytes[b], bytes[e]}, OffsetSegment::Kind::exact});
  };
  for (std::size_t k = 0; k < chars.size();) {
    if (text::is_space(chars[k])) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e < chars.size() && !text::is_space(chars[e])) ++e;
    if (is_markup(std::string_view(text).substr(bytes[k], bytes[e] - bytes[k]))) {
      flush_gap(k);
      segments.push_back({{k, e}, {bytes[k], bytes[e]}, OffsetSegment::Kind::markup});
      gap_begin = e;
    }
    k = e;
  }
  flush_gap(chars.size());
  return CleanDocument(text, std::move(segments), std::move(source_url), sha256_hex(text), "utf-8");
}

std::string render_html(const CleanDocument& doc, const TagPolicy& policy) {
  // any name outside the policy's tag sets is an unknown element
  std::string boundary = "x-boundary";
  while (policy.kept_tags.count(boundary) || policy.removed_tags.count(boundary)) boundary += "-x";
  const std::u32string chars = text::to_utf32(doc.text());
  std::string out;
  out.reserve(doc.text().size());
  std::size_t k = 0;
  auto text_until = [&](std::size_t end) {
    for (; k < end; ++k) {
      const char32_t c = chars[k];
      if (c == '&') out += "&amp;";
      else if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else text::append_utf8(out, c);
    }
  };
  for (const auto& seg : doc.offset_map()) {
    if (seg.kind != OffsetSegment::Kind::markup) continue;
    text_until(seg.clean.first);
    const std::string token = doc.substr(seg.clean);
    if (token == policy.boundary_open_token) out += "<" + boundary + ">";
    else if (token == policy.boundary_close_token) out += "</" + boundary + ">";
    else out += token;
    k = seg.clean.second;
  }
  text_until(chars.size());
  return out;
}

}  // namespace wex::html
