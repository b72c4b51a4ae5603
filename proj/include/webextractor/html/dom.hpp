#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wex::html {

// Raw bytes decoded to code points; every code point remembers the raw byte
// range it came from.
struct DecodedInput {
  std::u32string chars;
  std::vector<std::size_t> raw_begin;
  std::vector<std::size_t> raw_end;
  // raw bytes of char i are exactly its UTF-8 encoding
  std::vector<bool> verbatim;
  std::string encoding;
};

// Charset from the Content-Type header, then <meta>, then UTF-8.
std::string sniff_charset(std::string_view raw, std::string_view content_type);
DecodedInput decode_input(std::string_view raw, std::string_view content_type = {});

// Decoded form of a character reference starting at text[pos] == '&'.
struct CharRef {
  std::u32string value;
  std::size_t length = 0;  // code points consumed, 0 if no reference
};
CharRef match_char_ref(std::u32string_view text, std::size_t pos);

struct Node {
  enum class Kind { document, element, text, comment };
  using Range = std::pair<std::size_t, std::size_t>;  // char indices [begin, end)

  Kind kind = Kind::document;
  std::string name;       // lower-case tag name
  Range span{0, 0};       // open tag (element) or content (text, comment)
  std::optional<Range> close_tag;  // explicit end tag, if any
  bool self_closing = false;       // "<x/>" or a void element
  bool raw_text = false;           // text from script/style-like elements
  std::size_t parent = 0;
  std::vector<std::size_t> children;

  bool closed() const { return self_closing || close_tag.has_value(); }
};

// Error-recovering parse; never rejects input.
class HtmlDocument {
 public:
  static std::shared_ptr<const HtmlDocument> parse(std::string_view raw, std::string_view content_type = {});

  const DecodedInput& input() const { return input_; }
  std::string_view raw() const { return raw_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t size() const { return nodes_.size(); }
  static constexpr std::size_t root() { return 0; }

  // Pre-order search for the first element with this name.
  std::optional<std::size_t> find_first(std::string_view name) const;

  // Raw byte extent of a node including descendants and end tag.
  std::pair<std::size_t, std::size_t> raw_extent(std::size_t node) const;

  std::pair<std::size_t, std::size_t> raw_range(Node::Range chars) const;

 private:
  HtmlDocument() = default;
  std::size_t extent_end_char(std::size_t node) const;

  std::string raw_;
  DecodedInput input_;
  std::vector<Node> nodes_;
  friend class TreeBuilder;
};

// Handle on the subtree the normalizer works from.
struct Subtree {
  std::shared_ptr<const HtmlDocument> doc;
  std::size_t node = HtmlDocument::root();
  bool is_body = false;

  // Raw markup of the node's children.
  std::string inner_html() const;
  // Decoded text of all descendant text nodes, script/style excluded.
  std::string text_content() const;
};

// Body subtree, or the whole document when there is no <body>.
Subtree extract_body(std::string_view raw_html, std::string_view content_type = {});
Subtree extract_body(std::shared_ptr<const HtmlDocument> doc);

bool is_void_element(std::string_view name);

}  // namespace wex::html
