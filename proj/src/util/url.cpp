#include "webextractor/util/url.hpp"

#include <cctype>

#include "webextractor/error.hpp"
#include "webextractor/util/text.hpp"

namespace wex {

std::string Url::origin() const {
  std::string out = scheme + "://" + host;
  if (port != 0) out += ":" + std::to_string(port);
  return out;
}

Url Url::parse(std::string_view url) {
  const auto sep = url.find("://");
  require(sep != std::string_view::npos && sep > 0, ErrorCode::precondition,
          "URL has no scheme: " + std::string(url));
  Url out;
  out.scheme = text::to_lower_ascii(url.substr(0, sep));
  require(out.scheme == "http" || out.scheme == "https", ErrorCode::precondition,
          "unsupported URL scheme: " + out.scheme);
  std::string_view rest = url.substr(sep + 3);
  const auto path_pos = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, path_pos);
  if (path_pos == std::string_view::npos) {
    out.path_and_query = "/";
  } else {
    std::string_view tail = rest.substr(path_pos);
    if (const auto frag = tail.find('#'); frag != std::string_view::npos) tail = tail.substr(0, frag);
    out.path_and_query = tail.empty() || tail.front() != '/' ? "/" + std::string(tail) : std::string(tail);
  }
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const std::string port_str(authority.substr(colon + 1));
    authority = authority.substr(0, colon);
    require(!port_str.empty() && port_str.find_first_not_of("0123456789") == std::string::npos,
            ErrorCode::precondition, "bad port in URL: " + std::string(url));
    out.port = std::stoi(port_str);
  }
  out.host = text::to_lower_ascii(authority);
  require(!out.host.empty(), ErrorCode::precondition, "URL has no host: " + std::string(url));
  return out;
}

std::string url_escape(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string url_unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

}  // namespace wex
