#include <unicode/ucnv.h>

#include <memory>

#include "webextractor/error.hpp"
#include "webextractor/html/dom.hpp"
#include "webextractor/util/text.hpp"

namespace wex::html {

namespace {

std::string charset_param(std::string_view s) {
  const std::string lower = text::to_lower_ascii(s);
  const auto pos = lower.find("charset");
  if (pos == std::string::npos) return {};
  std::size_t i = pos + 7;
  while (i < lower.size() && (lower[i] == ' ' || lower[i] == '\t')) ++i;
  if (i >= lower.size() || lower[i] != '=') return {};
  ++i;
  while (i < lower.size() && (lower[i] == ' ' || lower[i] == '"' || lower[i] == '\'')) ++i;
  std::size_t j = i;
  while (j < lower.size() && lower[j] != '"' && lower[j] != '\'' && lower[j] != ';' && lower[j] != ' ' &&
         lower[j] != '>' && lower[j] != '/') {
    ++j;
  }
  return lower.substr(i, j - i);
}

bool is_utf8_name(std::string_view name) { return name.empty() || name == "utf-8" || name == "utf8"; }

void decode_utf8(std::string_view raw, DecodedInput& out) {
  std::size_t i = 0;
  if (raw.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  while (i < raw.size()) {
    char32_t cp = 0;
    std::size_t len = text::decode_utf8_at(raw, i, cp);
    if (len == 0) {
      len = 1;
      out.chars.push_back(0xFFFD);
      out.verbatim.push_back(false);
    } else {
      out.chars.push_back(cp);
      out.verbatim.push_back(true);
    }
    out.raw_begin.push_back(i);
    out.raw_end.push_back(i + len);
    i += len;
  }
}

void decode_icu(std::string_view raw, const std::string& charset, DecodedInput& out) {
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<UConverter, decltype(&ucnv_close)> conv(ucnv_open(charset.c_str(), &status), &ucnv_close);
  if (U_FAILURE(status)) {
    out.encoding = "utf-8";
    decode_utf8(raw, out);
    return;
  }
  std::vector<UChar> units(raw.size() * 2 + 16);
  std::vector<int32_t> offsets(units.size());
  UChar* target = units.data();
  const char* source = raw.data();
  ucnv_toUnicode(conv.get(), &target, units.data() + units.size(), &source, raw.data() + raw.size(),
                 offsets.data(), true, &status);
  require(U_SUCCESS(status), ErrorCode::invalid, "charset conversion failed for " + charset);
  const std::size_t n = static_cast<std::size_t>(target - units.data());
  std::vector<std::size_t> starts;
  for (std::size_t k = 0; k < n; ++k) {
    char32_t cp = units[k];
    std::size_t start = offsets[k] < 0 ? (starts.empty() ? 0 : starts.back()) : static_cast<std::size_t>(offsets[k]);
    if (U16_IS_LEAD(units[k]) && k + 1 < n && U16_IS_TRAIL(units[k + 1])) {
      cp = U16_GET_SUPPLEMENTARY(units[k], units[k + 1]);
      ++k;
    }
    out.chars.push_back(cp);
    starts.push_back(start);
  }
  std::vector<std::size_t> ends(starts.size(), raw.size());
  for (std::size_t k = starts.size(); k-- > 1;) {
    ends[k - 1] = starts[k] > starts[k - 1] ? starts[k] : ends[k];
  }
  for (std::size_t k = 0; k < starts.size(); ++k) {
    out.raw_begin.push_back(starts[k]);
    out.raw_end.push_back(ends[k]);
    std::string enc;
    text::append_utf8(enc, out.chars[k]);
    out.verbatim.push_back(raw.substr(starts[k], ends[k] - starts[k]) == enc);
  }
}

}  // namespace

std::string sniff_charset(std::string_view raw, std::string_view content_type) {
  if (auto cs = charset_param(content_type); !cs.empty()) return cs;
  const std::string head = text::to_lower_ascii(raw.substr(0, 2048));
  std::size_t pos = 0;
  while ((pos = head.find("<meta", pos)) != std::string::npos) {
    const auto end = head.find('>', pos);
    const std::string tag = head.substr(pos, end == std::string::npos ? std::string::npos : end - pos + 1);
    if (auto cs = charset_param(tag); !cs.empty()) return cs;
    pos += 5;
  }
  return "utf-8";
}

DecodedInput decode_input(std::string_view raw, std::string_view content_type) {
  DecodedInput out;
  std::string charset = sniff_charset(raw, content_type);
  // A document that declares a legacy charset but is valid UTF-8 with a BOM is UTF-8.
  if (raw.substr(0, 3) == "\xEF\xBB\xBF") charset = "utf-8";
  out.encoding = is_utf8_name(charset) ? "utf-8" : charset;
  out.chars.reserve(raw.size());
  if (out.encoding == "utf-8") {
    decode_utf8(raw, out);
  } else {
    decode_icu(raw, charset, out);
  }
  return out;
}

}  // namespace wex::html
