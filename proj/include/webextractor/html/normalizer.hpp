#pragma once

#include <set>
#include <string>
#include <string_view>

#include "webextractor/html/clean_document.hpp"
#include "webextractor/html/dom.hpp"

namespace wex::html {

struct TagPolicy {
  std::set<std::string, std::less<>> kept_tags{"div", "p", "h1", "h2", "h3", "h4", "h5", "h6", "ul", "li"};
  std::set<std::string, std::less<>> removed_tags{"script", "style", "img"};
  std::string boundary_open_token = "<start>";
  std::string boundary_close_token = "<end>";

  // Throws config when kept and removed overlap or a token is empty.
  void validate() const;
};

struct SourceInfo {
  std::string url;
  std::string content_type;
};

// Body of raw_html reduced to the token stream, with its offset map.
CleanDocument normalize(std::string_view raw_html, const TagPolicy& policy = {}, const SourceInfo& source = {});
CleanDocument normalize(const Subtree& subtree, const TagPolicy& policy = {}, const SourceInfo& source = {});

// HTML that normalizes back to the same token stream: text is escaped, kept
// tags are written as themselves and boundary tokens as an unknown element.
std::string render_html(const CleanDocument& doc, const TagPolicy& policy = {});

// Rebuilds a document from text that is already in token-stream form, e.g. a
// context received over the wire. Whitespace-separated tokens that the policy
// emits as markup become markup segments; the text itself stands in as the
// raw source, so source_hash is the digest of text.
CleanDocument parse_clean_text(std::string_view text, const TagPolicy& policy = {}, std::string source_url = {});

}  // namespace wex::html
