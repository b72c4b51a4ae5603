#include "webextractor/app/toml.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <string>

#include "webextractor/error.hpp"
#include "webextractor/util/text.hpp"

namespace wex::app {

using nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  json run() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        read_pair(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::config, "config line " + std::to_string(line_) + ": " + what);
  }

  void skip_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void newline() {
    if (peek() == '\r') ++pos_;
    if (peek() == '\n') {
      ++pos_;
      ++line_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_space();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        newline();
      } else {
        return;
      }
    }
  }

  // Whitespace, comments and newlines, for inside arrays.
  void skip_all() {
    while (true) {
      skip_space();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        newline();
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_space();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n' && peek() != '\r') error("unexpected text after value");
    newline();
  }

  std::string read_key_part() {
    skip_space();
    if (peek() == '"') return read_basic_string();
    if (peek() == '\'') return read_literal_string();
    const std::size_t begin = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (pos_ == begin) error("expected a key");
    return std::string(s_.substr(begin, pos_ - begin));
  }

  std::vector<std::string> read_dotted_key() {
    std::vector<std::string> parts{read_key_part()};
    skip_space();
    while (peek() == '.') {
      ++pos_;
      parts.push_back(read_key_part());
      skip_space();
    }
    return parts;
  }

  json& descend(json& root, const std::vector<std::string>& path, std::size_t count) {
    json* t = &root;
    for (std::size_t i = 0; i < count; ++i) {
      json& next = (*t)[path[i]];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) error("'" + path[i] + "' is already a value");
      t = &next;
    }
    return *t;
  }

  json& open_table(json& root) {
    ++pos_;
    if (peek() == '[') error("arrays of tables are not supported");
    const auto path = read_dotted_key();
    skip_space();
    if (peek() != ']') error("expected ']'");
    ++pos_;
    std::string joined;
    for (const auto& part : path) joined += part + '\x1f';
    if (!headers_.insert(joined).second) error("table [" + text::join(path, ".") + "] defined twice");
    return descend(root, path, path.size());
  }

  void read_pair(json& table) {
    const auto path = read_dotted_key();
    skip_space();
    if (peek() != '=') error("expected '=' after key");
    ++pos_;
    skip_space();
    json& parent = descend(table, path, path.size() - 1);
    if (parent.contains(path.back())) error("duplicate key '" + path.back() + "'");
    parent[path.back()] = read_value();
  }

  json read_value() {
    const char c = peek();
    if (c == '"') return read_basic_string();
    if (c == '\'') return read_literal_string();
    if (c == '[') return read_array();
    if (c == '{') error("inline tables are not supported");
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return read_number();
  }

  json read_number() {
    const std::size_t begin = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_')) {
      ++pos_;
    }
    std::string raw;
    for (char ch : s_.substr(begin, pos_ - begin)) {
      if (ch != '_') raw.push_back(ch);
    }
    if (raw.empty()) error("expected a value");
    if (raw.front() == '+') raw.erase(0, 1);
    const bool is_float = raw.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || ptr != raw.data() + raw.size()) error("bad value '" + raw + "'");
      return v;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(raw, &used);
    } catch (const std::exception&) {
      error("bad number '" + raw + "'");
    }
    if (used != raw.size()) error("bad number '" + raw + "'");
    return v;
  }

  std::string read_literal_string() {
    ++pos_;
    const std::size_t begin = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
    if (peek() != '\'') error("unterminated string");
    std::string out(s_.substr(begin, pos_ - begin));
    ++pos_;
    return out;
  }

  std::string read_basic_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') error("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (eof()) error("unterminated escape");
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'u':
        case 'U': {
          const std::size_t len = e == 'u' ? 4 : 8;
          if (pos_ + len > s_.size()) error("short unicode escape");
          std::uint32_t cp = 0;
          const auto hex = s_.substr(pos_, len);
          const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
          if (ec != std::errc() || ptr != hex.data() + hex.size()) error("bad unicode escape");
          pos_ += len;
          text::append_utf8(out, static_cast<char32_t>(cp));
          break;
        }
        default: error(std::string("unknown escape \\") + e);
      }
    }
  }

  json read_array() {
    ++pos_;
    json arr = json::array();
    while (true) {
      skip_all();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(read_value());
      skip_all();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      error("expected ',' or ']' in array");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::set<std::string> headers_;
  std::size_t line_ = 1;
};

}  // namespace

json parse_toml(std::string_view text) { return Reader(text).run(); }

}  // namespace wex::app
