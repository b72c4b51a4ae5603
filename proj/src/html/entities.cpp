#include <algorithm>
#include <array>
#include <string_view>

#include "webextractor/html/dom.hpp"

namespace wex::html {

namespace {

struct NamedRef {
  std::string_view name;  // includes the trailing ';' when required
  char32_t first;
  char32_t second;
};

constexpr NamedRef kNamedRefs[] = {
#include "entity_table.inc"
};

// Numeric references in the C1 range map through windows-1252.
constexpr std::array<char32_t, 32> kC1Remap = {
    0x20AC, 0x81,   0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0x8D,   0x017D, 0x8F,   0x90,   0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x9D,   0x017E, 0x0178};

const NamedRef* lookup(std::string_view name) {
  const auto it = std::lower_bound(std::begin(kNamedRefs), std::end(kNamedRefs), name,
                                   [](const NamedRef& r, std::string_view n) { return r.name < n; });
  if (it != std::end(kNamedRefs) && it->name == name) return &*it;
  return nullptr;
}

bool is_alnum(char32_t c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

CharRef numeric(std::u32string_view text, std::size_t pos) {
  std::size_t i = pos + 2;
  const bool hex = i < text.size() && (text[i] == 'x' || text[i] == 'X');
  if (hex) ++i;
  const std::size_t digits_start = i;
  std::uint64_t value = 0;
  while (i < text.size()) {
    const char32_t c = text[i];
    int d = -1;
    if (c >= '0' && c <= '9') d = static_cast<int>(c - '0');
    else if (hex && c >= 'a' && c <= 'f') d = static_cast<int>(c - 'a' + 10);
    else if (hex && c >= 'A' && c <= 'F') d = static_cast<int>(c - 'A' + 10);
    if (d < 0) break;
    value = std::min<std::uint64_t>(value * (hex ? 16 : 10) + static_cast<std::uint64_t>(d), 0x110000);
    ++i;
  }
  if (i == digits_start) return {};
  if (i < text.size() && text[i] == ';') ++i;
  char32_t cp = static_cast<char32_t>(value);
  if (value == 0 || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) cp = 0xFFFD;
  else if (value >= 0x80 && value <= 0x9F) cp = kC1Remap[value - 0x80];
  return {std::u32string(1, cp), i - pos};
}

}  // namespace

CharRef match_char_ref(std::u32string_view text, std::size_t pos) {
  if (pos >= text.size() || text[pos] != '&') return {};
  if (pos + 1 < text.size() && text[pos + 1] == '#') return numeric(text, pos);
  // Longest name is 32 characters plus ';'.
  std::string name;
  std::size_t i = pos + 1;
  while (i < text.size() && name.size() < 33 && is_alnum(text[i])) {
    name.push_back(static_cast<char>(text[i]));
    ++i;
  }
  if (name.empty()) return {};
  auto make = [](const NamedRef* r, std::size_t len) {
    CharRef ref{std::u32string(1, r->first), len};
    if (r->second != 0) ref.value.push_back(r->second);
    return ref;
  };
  if (i < text.size() && text[i] == ';') {
    if (const NamedRef* r = lookup(name + ";")) return make(r, name.size() + 2);
  }
  // Legacy references without the semicolon: longest matching prefix.
  for (std::size_t len = name.size(); len > 0; --len) {
    if (const NamedRef* r = lookup(std::string_view(name).substr(0, len))) return make(r, len + 1);
  }
  return {};
}

}  // namespace wex::html
