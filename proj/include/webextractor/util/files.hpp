#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wex::files {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, flushes, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace wex::files
