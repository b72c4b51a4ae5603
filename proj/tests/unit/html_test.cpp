#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "webextractor/error.hpp"
#include "webextractor/html/clean_document.hpp"
#include "webextractor/html/dom.hpp"
#include "webextractor/html/normalizer.hpp"
#include "webextractor/util/digest.hpp"
#include "webextractor/util/text.hpp"

using namespace wex;
using namespace wex::html;

namespace {

constexpr std::string_view kDeskadena = R"(<dd class="begin-date">1997<!---->(25 years ago)</dd>)";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid;
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

Range find_cp(const CleanDocument& doc, const std::string& needle) {
  const auto byte = doc.text().find(needle);
  EXPECT_NE(byte, std::string::npos) << needle;
  const auto begin = text::code_point_count(doc.text().substr(0, byte));
  return {begin, begin + text::code_point_count(needle)};
}

}  // namespace

TEST(ExtractBody, InnerHtmlOfBody) {
  EXPECT_EQ(extract_body("<html><body><p>x</p></body></html>").inner_html(), "<p>x</p>");
}

TEST(ExtractBody, WholeDocumentWithoutBody) {
  const auto sub = extract_body("<div>a</div><p>b</p>");
  EXPECT_FALSE(sub.is_body);
  EXPECT_EQ(sub.text_content(), "ab");
}

TEST(ExtractBody, RecoversNestedMalformedMarkup) {
  const auto sub = extract_body("<body><div><p>a</div>");
  EXPECT_TRUE(sub.is_body);
  EXPECT_NE(sub.text_content().find('a'), std::string::npos);
  // the parser closes <p> implicitly; no close token is invented for it
  EXPECT_EQ(normalize("<body><div><p>a</div>").text(), "<div> <p> a </div>");
}

TEST(Normalize, DeskadenaSnippet) {
  EXPECT_EQ(normalize(kDeskadena).text(), "<start> 1997 (25 years ago) <end>");
}

TEST(Normalize, ScriptIsDropped) { EXPECT_EQ(normalize("<script>var a=1;</script><p>hi</p>").text(), "<p> hi </p>"); }

TEST(Normalize, KeptTagsPreserved) {
  EXPECT_EQ(normalize("<ul><li>a</li><li>b</li></ul>").text(), "<ul> <li> a </li> <li> b </li> </ul>");
}

TEST(Normalize, StyleAndImageDropped) {
  EXPECT_EQ(normalize("<style>p{color:red}</style><p>x<img src=a.png alt=logo>y</p>").text(), "<p> x y </p>");
}

TEST(Normalize, EntitiesAndWhitespace) {
  EXPECT_EQ(normalize("<p>Tom &amp;\n  Jerry&nbsp;&#233;t&eacute;</p>").text(), "<p> Tom & Jerry \xC3\xA9t\xC3\xA9 </p>");
}

TEST(Normalize, HeadContentIgnored) {
  EXPECT_EQ(normalize("<html><head><title>T</title></head><body><h1>Head</h1></body></html>").text(),
            "<h1> Head </h1>");
}

TEST(Normalize, Latin1FromContentType) {
  const std::string raw = "<p>caf\xE9</p>";
  EXPECT_EQ(normalize(raw, {}, {"", "text/html; charset=iso-8859-1"}).text(), "<p> caf\xC3\xA9 </p>");
}

TEST(Normalize, CustomPolicy) {
  TagPolicy p;
  p.kept_tags.insert("dd");
  EXPECT_EQ(normalize(kDeskadena, p).text(), "<dd> 1997 (25 years ago) </dd>");
  p.removed_tags.insert("dd");
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::config);
}

TEST(Normalize, SourceHashIsRawDigest) {
  const auto doc = normalize(kDeskadena, {}, {"https://musicbrainz.org/artist/x", ""});
  EXPECT_EQ(doc.source_hash(), sha256_hex(kDeskadena));
  EXPECT_EQ(doc.source_url(), "https://musicbrainz.org/artist/x");
}

TEST(ProjectSpan, DeskadenaYear) {
  const auto doc = normalize(kDeskadena);
  const auto span = project_span(doc, kDeskadena, find_cp(doc, "1997"));
  EXPECT_EQ(span.raw_text, "1997");
  EXPECT_EQ(kDeskadena.substr(span.raw.first, span.raw.second - span.raw.first), "1997");
}

TEST(ProjectSpan, EmptyRange) {
  const auto doc = normalize(kDeskadena);
  const auto span = project_span(doc, kDeskadena, {3, 3});
  EXPECT_EQ(span.raw.first, span.raw.second);
  EXPECT_EQ(span.raw_text, "");
}

TEST(ProjectSpan, MarkupOnlyIsNotProjectable) {
  const auto doc = normalize(kDeskadena);
  EXPECT_EQ(code_of([&] { project_span(doc, kDeskadena, {0, 7}); }), ErrorCode::not_projectable);
}

TEST(ProjectSpan, WrongRawIsIntegrityError) {
  const auto doc = normalize(kDeskadena);
  EXPECT_EQ(code_of([&] { project_span(doc, "<dd>1998</dd>", {8, 12}); }), ErrorCode::integrity);
}

TEST(ProjectSpan, EntityInsideSpanCoversWholeReference) {
  const std::string raw = "<p>Tom &amp; Jerry</p>";
  const auto doc = normalize(raw);
  const auto span = project_span(doc, raw, find_cp(doc, "& Jerry"));
  EXPECT_EQ(span.raw_text, "&amp; Jerry");
}

TEST(CleanDocument, JsonRoundTrip) {
  const auto doc = normalize("<p>Tom &amp; Jerry</p><b>x</b>", {}, {"https://x.test/", ""});
  const auto back = CleanDocument::from_json(doc.to_json());
  EXPECT_EQ(back.text(), doc.text());
  EXPECT_EQ(back.offset_map(), doc.offset_map());
  EXPECT_EQ(back.source_hash(), doc.source_hash());
  EXPECT_EQ(back.visible_runs(), doc.visible_runs());
}

TEST(CleanDocument, VisibleText) {
  const auto doc = normalize("<h1>Title</h1><dl><dt>Area:</dt><dd>Spain</dd></dl>");
  EXPECT_EQ(doc.visible_text(), "Title Area: Spain");
}

TEST(ParseCleanText, RebuildsMarkupSegments) {
  const auto doc = parse_clean_text("<start> 1997 (25 years ago) <end>");
  EXPECT_EQ(doc.text(), "<start> 1997 (25 years ago) <end>");
  ASSERT_EQ(doc.visible_runs().size(), 1u);
  EXPECT_EQ(doc.substr(doc.visible_runs()[0]), "1997 (25 years ago)");
  EXPECT_EQ(doc.source_hash(), sha256_hex(doc.text()));
}

// ---- properties over random HTML ----

class RandomHtmlProperty : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomHtmlProperty, RemovedContentNeverSurvives) {
  std::mt19937_64 rng(GetParam());
  for (int i = 0; i < 200; ++i) {
    const auto sample = testkit::random_html(rng);
    const auto doc = normalize(sample.html);
    for (const auto& body : sample.removed_bodies) {
      ASSERT_EQ(doc.text().find(body), std::string::npos) << sample.html;
    }
    ASSERT_EQ(doc.text().find("zq"), std::string::npos) << sample.html;
  }
}

TEST_P(RandomHtmlProperty, RunsRoundTripThroughRawBytes) {
  std::mt19937_64 rng(GetParam());
  for (int i = 0; i < 200; ++i) {
    const auto sample = testkit::random_html(rng);
    const auto doc = normalize(sample.html);
    for (const auto& run : doc.visible_runs()) {
      const auto span = project_span(doc, sample.html, run);
      const auto again = normalize(span.raw_text);
      ASSERT_EQ(text::collapse_whitespace(again.visible_text()), text::collapse_whitespace(doc.substr(run)))
          << sample.html;
    }
  }
}

TEST_P(RandomHtmlProperty, RenderThenNormalizeKeepsVisibleText) {
  std::mt19937_64 rng(GetParam());
  for (int i = 0; i < 200; ++i) {
    const auto sample = testkit::random_html(rng);
    const auto doc = normalize(sample.html);
    const auto again = normalize(render_html(doc));
    ASSERT_EQ(again.visible_text(), doc.visible_text()) << sample.html;
    // unclosed tags can gain close tokens on the first pass, after that it is a fixed point
    const auto third = normalize(render_html(again));
    ASSERT_EQ(third.text(), again.text()) << sample.html;
  }
}

TEST_P(RandomHtmlProperty, BoundaryTokensPairUpToUnclosedTags) {
  std::mt19937_64 rng(GetParam());
  const TagPolicy policy;
  for (int i = 0; i < 200; ++i) {
    const auto sample = testkit::random_html(rng);
    const auto parsed = HtmlDocument::parse(sample.html);
    std::size_t unclosed = 0;
    for (std::size_t n = 0; n < parsed->size(); ++n) {
      const auto& node = parsed->node(n);
      if (node.kind == Node::Kind::element && !node.closed()) ++unclosed;
    }
    const auto doc = normalize(sample.html);
    const auto opens = count_of(doc.text(), policy.boundary_open_token);
    const auto closes = count_of(doc.text(), policy.boundary_close_token);
    ASSERT_LE(opens > closes ? opens - closes : closes - opens, unclosed) << sample.html;
  }
}

TEST_P(RandomHtmlProperty, OffsetMapIsOrderedAndCoversText) {
  std::mt19937_64 rng(GetParam());
  for (int i = 0; i < 200; ++i) {
    const auto sample = testkit::random_html(rng);
    const auto doc = normalize(sample.html);
    std::size_t covered = 0;
    std::size_t last_raw = 0;
    for (const auto& seg : doc.offset_map()) {
      ASSERT_LE(seg.clean.first, seg.clean.second);
      ASSERT_LE(seg.raw.first, seg.raw.second);
      ASSERT_LE(seg.raw.second, sample.html.size());
      ASSERT_GE(seg.raw.first, last_raw);
      last_raw = seg.raw.first;
      covered += seg.clean.second - seg.clean.first;
    }
    ASSERT_LE(covered, doc.length());
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomHtmlProperty, ::testing::Values(1u, 2u, 3u, 4u, 5u));
