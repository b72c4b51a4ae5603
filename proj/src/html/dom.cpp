#include "webextractor/html/dom.hpp"

#include <algorithm>
#include <array>

#include "webextractor/util/text.hpp"

namespace wex::html {

namespace {

bool is_ascii_alpha(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_html_space(char32_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

char32_t ascii_lower(char32_t c) { return (c >= 'A' && c <= 'Z') ? c + 32 : c; }

template <std::size_t N>
bool one_of(std::string_view name, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), name) != set.end();
}

constexpr std::array<std::string_view, 14> kVoid = {"area", "base", "br",   "col",   "embed",  "hr",    "img",
                                                    "input", "link", "meta", "param", "source", "track", "wbr"};
constexpr std::array<std::string_view, 6> kRawText = {"script", "style", "xmp", "iframe", "noembed", "noframes"};
constexpr std::array<std::string_view, 2> kRcdata = {"title", "textarea"};
constexpr std::array<std::string_view, 10> kScope = {"applet", "caption", "html",     "table",  "td",
                                                     "th",     "marquee", "object",   "template", "button"};
constexpr std::array<std::string_view, 6> kHeadings = {"h1", "h2", "h3", "h4", "h5", "h6"};
constexpr std::array<std::string_view, 34> kClosesP = {
    "address", "article", "aside",  "blockquote", "center", "details", "dialog", "dir",     "div",
    "dl",      "fieldset", "figcaption", "figure", "footer", "form",   "h1",     "h2",      "h3",
    "h4",      "h5",       "h6",     "header",     "hgroup", "hr",      "main",   "menu",    "nav",
    "ol",      "p",        "pre",    "section",    "table"};

}  // namespace

bool is_void_element(std::string_view name) { return one_of(name, kVoid); }

class TreeBuilder {
 public:
  explicit TreeBuilder(HtmlDocument& doc) : doc_(doc), s_(doc.input_.chars) {
    doc_.nodes_.push_back(Node{});
    stack_.push_back(0);
  }

  void run() {
    std::size_t i = 0;
    std::size_t text_start = 0;
    while (i < s_.size()) {
      if (s_[i] != '<') {
        ++i;
        continue;
      }
      const std::size_t tag_begin = i;
      Tag tag;
      if (!scan_markup(i, tag)) {
        ++i;
        continue;
      }
      flush_text(text_start, tag_begin);
      i = tag.end;
      text_start = i;
      switch (tag.kind) {
        case Tag::Kind::comment: add_leaf(Node::Kind::comment, {tag_begin, tag.end}); break;
        case Tag::Kind::ignored: break;
        case Tag::Kind::end: handle_end(tag.name, {tag_begin, tag.end}); break;
        case Tag::Kind::start: {
          const bool raw = one_of(tag.name, kRawText);
          const bool rcdata = one_of(tag.name, kRcdata);
          if (raw || rcdata) tag.self_closing = false;
          handle_start(tag.name, {tag_begin, tag.end}, tag.self_closing);
          if (raw || rcdata) {
            i = consume_raw_text(tag.name, i, raw);
            text_start = i;
          }
          break;
        }
      }
    }
    flush_text(text_start, s_.size());
  }

 private:
  struct Tag {
    enum class Kind { start, end, comment, ignored };
    Kind kind = Kind::ignored;
    std::string name;
    bool self_closing = false;
    std::size_t end = 0;
  };

  // Position just after the next '>' at or after from, or npos.
  std::size_t after_gt(std::size_t from) const {
    for (std::size_t k = from; k < s_.size(); ++k) {
      if (s_[k] == '>') return k + 1;
    }
    return std::u32string::npos;
  }

  bool scan_markup(std::size_t i, Tag& tag) const {
    const std::size_t n = s_.size();
    if (i + 1 >= n) return false;
    const char32_t c = s_[i + 1];
    if (c == '!') {
      tag.kind = Tag::Kind::comment;
      if (i + 3 < n && s_[i + 2] == '-' && s_[i + 3] == '-') {
        std::size_t k = i + 4;
        if (k < n && s_[k] == '>') {
          tag.end = k + 1;
          return true;
        }
        if (k + 1 < n && s_[k] == '-' && s_[k + 1] == '>') {
          tag.end = k + 2;
          return true;
        }
        for (; k + 2 < n; ++k) {
          if (s_[k] == '-' && s_[k + 1] == '-') {
            if (s_[k + 2] == '>') {
              tag.end = k + 3;
              return true;
            }
            if (s_[k + 2] == '!' && k + 3 < n && s_[k + 3] == '>') {
              tag.end = k + 4;
              return true;
            }
          }
        }
        tag.end = n;
        return true;
      }
      const std::size_t e = after_gt(i + 2);
      tag.end = e == std::u32string::npos ? n : e;
      return true;
    }
    if (c == '?') {
      const std::size_t e = after_gt(i + 2);
      tag.kind = Tag::Kind::comment;
      tag.end = e == std::u32string::npos ? n : e;
      return true;
    }
    if (c == '/') {
      if (i + 2 >= n) return false;
      if (s_[i + 2] == '>') {
        tag.kind = Tag::Kind::ignored;
        tag.end = i + 3;
        return true;
      }
      if (!is_ascii_alpha(s_[i + 2])) {
        const std::size_t e = after_gt(i + 2);
        tag.kind = Tag::Kind::comment;
        tag.end = e == std::u32string::npos ? n : e;
        return true;
      }
      std::size_t k = i + 2;
      while (k < n && !is_html_space(s_[k]) && s_[k] != '/' && s_[k] != '>') {
        tag.name += text::to_utf8(std::u32string(1, ascii_lower(s_[k])));
        ++k;
      }
      const std::size_t e = after_gt(k);
      if (e == std::u32string::npos) return false;
      tag.kind = Tag::Kind::end;
      tag.end = e;
      return true;
    }
    if (!is_ascii_alpha(c)) return false;
    std::size_t k = i + 1;
    while (k < n && !is_html_space(s_[k]) && s_[k] != '/' && s_[k] != '>') {
      tag.name += text::to_utf8(std::u32string(1, ascii_lower(s_[k])));
      ++k;
    }
    // Attributes: skipped, but quoted values may contain '>'.
    while (k < n) {
      const char32_t a = s_[k];
      if (is_html_space(a)) {
        ++k;
      } else if (a == '>') {
        tag.kind = Tag::Kind::start;
        tag.end = k + 1;
        return true;
      } else if (a == '/') {
        if (k + 1 < n && s_[k + 1] == '>') {
          tag.kind = Tag::Kind::start;
          tag.self_closing = true;
          tag.end = k + 2;
          return true;
        }
        ++k;
      } else {
        ++k;  // first char of the name may be '='
        while (k < n && !is_html_space(s_[k]) && s_[k] != '/' && s_[k] != '>' && s_[k] != '=') ++k;
        while (k < n && is_html_space(s_[k])) ++k;
        if (k < n && s_[k] == '=') {
          ++k;
          while (k < n && is_html_space(s_[k])) ++k;
          if (k < n && (s_[k] == '"' || s_[k] == '\'')) {
            const char32_t q = s_[k];
            ++k;
            while (k < n && s_[k] != q) ++k;
            if (k >= n) return false;
            ++k;
          } else {
            while (k < n && !is_html_space(s_[k]) && s_[k] != '>') ++k;
          }
        }
      }
    }
    return false;
  }

  std::size_t consume_raw_text(const std::string& name, std::size_t from, bool raw) {
    const std::size_t n = s_.size();
    std::size_t close = std::u32string::npos;
    std::size_t close_end = n;
    for (std::size_t k = from; k + 1 < n && close == std::u32string::npos; ++k) {
      if (s_[k] != '<' || s_[k + 1] != '/') continue;
      std::size_t m = 0;
      while (m < name.size() && k + 2 + m < n && ascii_lower(s_[k + 2 + m]) == static_cast<char32_t>(name[m])) ++m;
      if (m != name.size()) continue;
      const std::size_t after = k + 2 + m;
      if (after < n && !is_html_space(s_[after]) && s_[after] != '/' && s_[after] != '>') continue;
      const std::size_t e = after_gt(after);
      if (e == std::u32string::npos) break;
      close = k;
      close_end = e;
    }
    const std::size_t content_end = close == std::u32string::npos ? n : close;
    if (content_end > from) {
      const std::size_t t = add_leaf(Node::Kind::text, {from, content_end});
      doc_.nodes_[t].raw_text = raw;
    }
    if (close == std::u32string::npos) return n;
    doc_.nodes_[stack_.back()].close_tag = Node::Range{close, close_end};
    stack_.pop_back();
    return close_end;
  }

  void flush_text(std::size_t begin, std::size_t end) {
    if (end > begin) add_leaf(Node::Kind::text, {begin, end});
  }

  std::size_t add_leaf(Node::Kind kind, Node::Range span) {
    Node node;
    node.kind = kind;
    node.span = span;
    return attach(std::move(node));
  }

  std::size_t attach(Node node) {
    const std::size_t id = doc_.nodes_.size();
    node.parent = stack_.back();
    doc_.nodes_[node.parent].children.push_back(id);
    doc_.nodes_.push_back(std::move(node));
    return id;
  }

  const std::string& name_at(std::size_t pos) const { return doc_.nodes_[stack_[pos]].name; }

  // Index in the stack of the nearest open element accepted by match,
  // searching down to (not past) an element accepted by stop.
  template <typename Match, typename Stop>
  std::optional<std::size_t> find_open(Match match, Stop stop) const {
    for (std::size_t pos = stack_.size(); pos-- > 1;) {
      if (match(name_at(pos))) return pos;
      if (stop(name_at(pos))) return std::nullopt;
    }
    return std::nullopt;
  }

  // Pops everything from pos upwards; none of them receive an end tag.
  void pop_to(std::size_t pos) { stack_.resize(pos); }

  void handle_start(const std::string& name, Node::Range span, bool self_closing) {
    auto in_scope = [](const std::string& n) { return one_of(n, kScope); };
    if (name == "li") {
      if (auto pos = find_open([](const std::string& n) { return n == "li"; },
                               [&](const std::string& n) { return n == "ul" || n == "ol" || n == "menu" || in_scope(n); }))
        pop_to(*pos);
    } else if (name == "dt" || name == "dd") {
      if (auto pos = find_open([](const std::string& n) { return n == "dt" || n == "dd"; },
                               [&](const std::string& n) { return n == "dl" || in_scope(n); }))
        pop_to(*pos);
    } else if (name == "tr") {
      if (auto pos = find_open([](const std::string& n) { return n == "tr"; },
                               [](const std::string& n) { return n == "table" || n == "html" || n == "template"; }))
        pop_to(*pos);
    } else if (name == "td" || name == "th") {
      if (auto pos = find_open([](const std::string& n) { return n == "td" || n == "th"; },
                               [](const std::string& n) { return n == "tr" || n == "table" || n == "html"; }))
        pop_to(*pos);
    } else if (name == "option" || name == "optgroup") {
      if (stack_.size() > 1 && name_at(stack_.size() - 1) == "option") pop_to(stack_.size() - 1);
    }
    if (one_of(name, kClosesP) || name == "li" || name == "dt" || name == "dd") {
      if (auto pos = find_open([](const std::string& n) { return n == "p"; }, in_scope)) pop_to(*pos);
    }
    if (one_of(name, kHeadings) && stack_.size() > 1 && one_of(name_at(stack_.size() - 1), kHeadings)) {
      pop_to(stack_.size() - 1);
    }
    Node node;
    node.kind = Node::Kind::element;
    node.name = name;
    node.span = span;
    node.self_closing = self_closing || is_void_element(name);
    const bool push = !node.self_closing;
    const std::size_t id = attach(std::move(node));
    if (push) stack_.push_back(id);
  }

  void handle_end(const std::string& name, Node::Range span) {
    if (is_void_element(name)) return;
    auto pos = find_open([&](const std::string& n) { return n == name; },
                         [](const std::string& n) { return one_of(n, kScope); });
    if (!pos) return;
    doc_.nodes_[stack_[*pos]].close_tag = span;
    pop_to(*pos);
  }

  HtmlDocument& doc_;
  const std::u32string& s_;
  std::vector<std::size_t> stack_;
};

std::shared_ptr<const HtmlDocument> HtmlDocument::parse(std::string_view raw, std::string_view content_type) {
  std::shared_ptr<HtmlDocument> doc(new HtmlDocument());
  doc->raw_ = std::string(raw);
  doc->input_ = decode_input(doc->raw_, content_type);
  TreeBuilder(*doc).run();
  return doc;
}

std::optional<std::size_t> HtmlDocument::find_first(std::string_view name) const {
  std::vector<std::size_t> todo{root()};
  while (!todo.empty()) {
    const std::size_t id = todo.back();
    todo.pop_back();
    const Node& n = nodes_[id];
    if (n.kind == Node::Kind::element && n.name == name) return id;
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) todo.push_back(*it);
  }
  return std::nullopt;
}

std::size_t HtmlDocument::extent_end_char(std::size_t id) const {
  while (true) {
    const Node& n = nodes_[id];
    if (n.close_tag) return n.close_tag->second;
    if (n.children.empty()) return id == root() ? input_.chars.size() : n.span.second;
    id = n.children.back();
  }
}

std::pair<std::size_t, std::size_t> HtmlDocument::raw_range(Node::Range chars) const {
  const std::size_t n = input_.chars.size();
  auto begin_of = [&](std::size_t c) { return c < n ? input_.raw_begin[c] : raw_.size(); };
  if (chars.first >= chars.second) {
    const std::size_t p = begin_of(chars.first);
    return {p, p};
  }
  return {input_.raw_begin[chars.first], input_.raw_end[chars.second - 1]};
}

std::pair<std::size_t, std::size_t> HtmlDocument::raw_extent(std::size_t id) const {
  if (id == root()) return {0, raw_.size()};
  return raw_range({nodes_[id].span.first, extent_end_char(id)});
}

std::string Subtree::inner_html() const {
  if (node == HtmlDocument::root()) return std::string(doc->raw());
  const Node& n = doc->node(node);
  if (n.self_closing) return {};
  // From the end of the open tag up to the end tag, or to the end of the last
  // descendant when unclosed.
  std::size_t stop = n.close_tag ? n.close_tag->first : n.span.second;
  if (!n.close_tag && !n.children.empty()) {
    std::size_t last = n.children.back();
    while (true) {
      const Node& c = doc->node(last);
      if (c.close_tag) {
        stop = c.close_tag->second;
        break;
      }
      if (c.children.empty()) {
        stop = c.span.second;
        break;
      }
      last = c.children.back();
    }
  }
  const auto [b, e] = doc->raw_range({n.span.second, stop});
  return std::string(doc->raw().substr(b, e - b));
}

std::string Subtree::text_content() const {
  std::string out;
  const auto& chars = doc->input().chars;
  std::vector<std::size_t> todo{node};
  while (!todo.empty()) {
    const std::size_t id = todo.back();
    todo.pop_back();
    const Node& n = doc->node(id);
    if (n.kind == Node::Kind::text && !n.raw_text) {
      std::u32string decoded;
      for (std::size_t i = n.span.first; i < n.span.second;) {
        if (chars[i] == '&') {
          const CharRef ref = match_char_ref(std::u32string_view(chars).substr(0, n.span.second), i);
          if (ref.length > 0) {
            decoded += ref.value;
            i += ref.length;
            continue;
          }
        }
        decoded.push_back(chars[i++]);
      }
      out += text::to_utf8(decoded);
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) todo.push_back(*it);
  }
  return out;
}

Subtree extract_body(std::shared_ptr<const HtmlDocument> doc) {
  Subtree sub{std::move(doc), HtmlDocument::root(), false};
  if (auto body = sub.doc->find_first("body")) {
    sub.node = *body;
    sub.is_body = true;
  }
  return sub;
}

Subtree extract_body(std::string_view raw_html, std::string_view content_type) {
  return extract_body(HtmlDocument::parse(raw_html, content_type));
}

}  // namespace wex::html
