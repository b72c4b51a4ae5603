#pragma once

#include <chrono>
#include <initializer_list>
#include <string>
#include <string_view>

namespace wex {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// First `chars` hex digits of the SHA-256 of the unit-separator-joined parts.
std::string stable_id(std::initializer_list<std::string_view> parts, std::size_t chars = 16);

using TimePoint = std::chrono::system_clock::time_point;

// ISO-8601 UTC with second precision, e.g. "2026-10-16T12:00:00Z".
std::string format_utc(TimePoint t);
TimePoint parse_utc(std::string_view s);

}  // namespace wex
