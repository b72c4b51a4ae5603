#pragma once

#include <string>
#include <string_view>

namespace wex {

struct Url {
  std::string scheme;
  std::string host;
  int port = 0;  // 0 means the scheme default
  std::string path_and_query;  // always starts with '/'

  // "scheme://host[:port]"
  std::string origin() const;

  static Url parse(std::string_view url);
};

// RFC 3986 percent-encoding; unreserved characters pass through.
std::string url_escape(std::string_view s);
std::string url_unescape(std::string_view s);

}  // namespace wex
