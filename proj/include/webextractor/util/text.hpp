#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 / Unicode helpers. Offsets called "cp" are code point indices, the
// unit used for every clean-text offset exchanged between pipeline stages.
namespace wex::text {

void append_utf8(std::string& out, char32_t cp);
std::string to_utf8(std::u32string_view s);

// Length of the valid UTF-8 sequence at s[i] (writing its code point), or 0.
std::size_t decode_utf8_at(std::string_view s, std::size_t i, char32_t& cp);

// Lenient decode: each invalid byte becomes U+FFFD.
std::u32string to_utf32(std::string_view s);

std::size_t code_point_count(std::string_view s);

// Byte offset of every code point boundary, size = code_point_count + 1.
std::vector<std::size_t> code_point_offsets(std::string_view s);

// Substring by code point range [begin, end).
std::string substr_cp(std::string_view s, std::size_t begin, std::size_t end);

std::string nfc(std::string_view s);
std::string fold_case(std::string_view s);
char32_t simple_fold(char32_t cp);
char32_t simple_lower(char32_t cp);

bool is_space(char32_t cp);
bool is_word_char(char32_t cp);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

// Case fold, trim, NFC: the equality key used for entity names.
std::string normalize_name(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool iequals_ascii(std::string_view a, std::string_view b);
std::string to_lower_ascii(std::string_view s);

}  // namespace wex::text
