#include <gtest/gtest.h>

#include <filesystem>

#include "oek/codeseg.hpp"
#include "oek/io.hpp"

using namespace oek;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = fs::path(OEK_DATA_DIR) / "codeseg";

std::vector<fs::path> corpus_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kCorpus))
    if (e.path().extension() == ".toy") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void collect_leaves(const SyntaxNode& n, std::vector<const SyntaxNode*>& out) {
  if (n.children.empty()) {
    out.push_back(&n);
    return;
  }
  for (const auto& c : n.children) collect_leaves(c, out);
}

std::string reconstruct(const SyntaxNode& root, std::string_view src) {
  std::vector<const SyntaxNode*> leaves;
  collect_leaves(root, leaves);
  std::string s;
  for (const auto* l : leaves) s += l->text(src);
  return s;
}

void check_nesting(const SyntaxNode& n) {
  std::size_t at = n.start;
  for (const auto& c : n.children) {
    EXPECT_GE(c.start, at);
    EXPECT_LE(c.end, n.end);
    EXPECT_LE(c.start, c.end);
    at = c.end;
    check_nesting(c);
  }
}

std::size_t count_kind(const SyntaxNode& n, NodeKind k) {
  std::size_t c = n.kind == k;
  for (const auto& ch : n.children) c += count_kind(ch, k);
  return c;
}

// Oversize snippets are allowed only when they hold one unsplittable leaf.
bool single_leaf(const SyntaxNode& root, std::string_view src, const Snippet& s) {
  std::vector<const SyntaxNode*> leaves;
  collect_leaves(root, leaves);
  std::size_t with_text = 0;
  for (const auto* l : leaves)
    if (l->start >= s.start && l->end <= s.end && non_ws_count(l->text(src)) > 0) ++with_text;
  return with_text == 1;
}

}  // namespace

TEST(ParseToy, SingleStatement) {
  const auto t = parse_toy("x = 1;");
  ASSERT_EQ(t.children.size(), 1u);
  EXPECT_EQ(t.children[0].kind, NodeKind::Statement);
  for (const auto& c : t.children[0].children) EXPECT_TRUE(c.is_leaf());
}

TEST(ParseToy, CommentThenStatement) {
  const std::string src = "// hi\nx=1;";
  const auto t = parse_toy(src);
  ASSERT_EQ(t.children.size(), 3u);
  EXPECT_EQ(t.children[0].kind, NodeKind::Comment);
  EXPECT_EQ(t.children[0].text(src), "// hi");
  EXPECT_EQ(t.children[2].kind, NodeKind::Statement);
}

TEST(ParseToy, NestedBlockReconstructs) {
  const std::string src = "if(a){x=1;y=2;}";
  const auto t = parse_toy(src);
  EXPECT_EQ(reconstruct(t, src), src);
  ASSERT_EQ(t.children.size(), 1u);
  const auto& stmt = t.children[0];
  const auto& block = stmt.children.back();
  EXPECT_EQ(block.kind, NodeKind::Block);
  std::size_t statements = 0;
  for (const auto& c : block.children) statements += c.kind == NodeKind::Statement;
  EXPECT_EQ(statements, 2u);
}

TEST(ParseToy, DeclarationKeyword) {
  const auto t = parse_toy("int x = 2;\nlet y;\nfoo = 1;");
  EXPECT_EQ(count_kind(t, NodeKind::Declaration), 2u);
  EXPECT_EQ(count_kind(t, NodeKind::Statement), 1u);
}

TEST(ParseToy, ErrorsCarryOffsets) {
  auto offset_of = [](const std::string& s) -> std::size_t {
    try {
      parse_toy(s);
    } catch (const ParseError& e) {
      return e.offset();
    }
    return 999;
  };
  EXPECT_EQ(offset_of("x = 1"), 0u);
  EXPECT_EQ(offset_of("x = (1;"), 4u);
  EXPECT_EQ(offset_of("a;}"), 2u);
  EXPECT_EQ(offset_of("s = \"abc;"), 4u);
  EXPECT_EQ(offset_of("f() {"), 4u);
}

TEST(Segment, ShortStatementIsOneSnippet) {
  const std::string src = "x = foo(1, 2);";
  const auto s = segment(parse_toy(src), src, 100);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], (Snippet{0, src.size(), SnippetType::Code, 11}));
}

TEST(Segment, DefaultMaxSize) { EXPECT_EQ(SegmentOptions{}.max_size, 100u); }

TEST(Segment, StatementsMergeCommentStaysText) {
  const std::string src = "x=1;\ny=2;\n// note\n";
  const auto raw = segment(parse_toy(src), src, 1000);
  ASSERT_EQ(raw.size(), 3u);
  const auto s = segment_source(src, SegmentOptions{1000, std::nullopt}, 1000);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].type, SnippetType::Code);
  EXPECT_EQ(src.substr(s[0].start, s[0].end - s[0].start), "x=1;\ny=2;\n");
  EXPECT_EQ(s[1].type, SnippetType::Text);
  EXPECT_EQ(src.substr(s[1].start, s[1].end - s[1].start), "// note\n");
}

TEST(Segment, ExpandDepthLimit) {
  const std::string src = "x = f(a);";
  const auto unlimited = segment(parse_toy(src), src, SegmentOptions{100, std::nullopt});
  const auto none = segment(parse_toy(src), src, SegmentOptions{100, 0});
  EXPECT_EQ(unlimited.size(), 1u);
  EXPECT_EQ(none.size(), 7u);  // every token on its own
}

TEST(Segment, RejectsBadArguments) {
  const std::string src = "x;";
  EXPECT_THROW(segment(parse_toy(src), src, 0), Error);
  EXPECT_THROW(segment(parse_toy(src), "x;y;", 10), Error);
}

TEST(Merge, NoContiguousPairsUnchanged) {
  const std::string src = "aaa;\"s\"bbb;";
  const std::vector<Snippet> in{{0, 4, SnippetType::Code, 4}, {4, 7, SnippetType::Text, 3}, {7, 11, SnippetType::Code, 4}};
  EXPECT_EQ(merge_postprocess(in, src, 100), in);
}

TEST(Merge, TwoThirtyCharSnippets) {
  const std::string a(30, 'a'), b(30, 'b');
  const std::string src = a + " " + b;
  const std::vector<Snippet> in{{0, 30, SnippetType::Code, 30}, {31, 61, SnippetType::Code, 30}};
  const auto out = merge_postprocess(in, src, 100);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (Snippet{0, 61, SnippetType::Code, 60}));
  EXPECT_EQ(merge_postprocess(in, src, 59).size(), 2u);
  EXPECT_EQ(merge_postprocess(in, src, 60).size(), 1u);
}

TEST(Merge, TypeMismatchNeverMerges) {
  const std::string src = "ab cd";
  const std::vector<Snippet> in{{0, 2, SnippetType::Code, 2}, {3, 5, SnippetType::Text, 2}};
  EXPECT_EQ(merge_postprocess(in, src, 100).size(), 2u);
}

TEST(Merge, OverlapRejected) {
  const std::string src = "abcdef";
  try {
    merge_postprocess({{0, 4, SnippetType::Code, 4}, {3, 6, SnippetType::Code, 3}}, src, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OverlapDetected);
  }
}

TEST(Merge, SnapsToNewlines) {
  const std::string src = "  a;  \n\n  b;\n";
  const std::vector<Snippet> in{{2, 4, SnippetType::Code, 2}, {10, 12, SnippetType::Text, 2}};
  const auto out = merge_postprocess(in, src, 100);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].start, 2u);   // no newline before it
  EXPECT_EQ(out[0].end, 7u);     // first newline after
  EXPECT_EQ(out[1].start, 8u);   // last newline before
  EXPECT_EQ(out[1].end, 13u);
}

TEST(Corpus, HasTwentyFiveFiles) { EXPECT_EQ(corpus_files().size(), 25u); }

TEST(Corpus, ParsesLosslessly) {
  for (const auto& p : corpus_files()) {
    const std::string src = read_file(p.string());
    const auto t = parse_toy(src);
    EXPECT_EQ(reconstruct(t, src), src) << p;
    check_nesting(t);
  }
}

TEST(Corpus, CoverageAndSizeBound) {
  for (std::size_t max_size : {100u, 40u, 10u}) {
    for (const auto& p : corpus_files()) {
      const std::string src = read_file(p.string());
      const auto tree = parse_toy(src);
      for (const auto& snips : {segment(tree, src, max_size), segment_source(src, {max_size, std::nullopt}, max_size)}) {
        std::vector<int> owner(src.size(), 0);
        std::size_t prev_end = 0;
        for (const auto& s : snips) {
          EXPECT_GE(s.start, prev_end) << p;
          prev_end = s.end;
          EXPECT_EQ(s.size, non_ws_count(std::string_view(src).substr(s.start, s.end - s.start))) << p;
          if (s.size > max_size) {
            EXPECT_TRUE(single_leaf(tree, src, s)) << p << " [" << s.start << "," << s.end << ")";
          }
          for (std::size_t i = s.start; i < s.end; ++i) ++owner[i];
        }
        for (std::size_t i = 0; i < src.size(); ++i)
          if (!detail::is_space(src[i])) {
            EXPECT_EQ(owner[i], 1) << p << " offset " << i;
          }
      }
    }
  }
}

TEST(Corpus, MergeIsIdempotent) {
  for (const auto& p : corpus_files()) {
    const std::string src = read_file(p.string());
    const auto once = segment_source(src, {}, 100);
    EXPECT_EQ(merge_postprocess(once, src, 100), once) << p;
  }
}

TEST(Corpus, ByteIdenticalAcrossRuns) {
  for (const auto& p : corpus_files()) {
    const std::string src = read_file(p.string());
    const std::string a = snippets_to_json(segment_source(src, {}, 100), src).dump();
    for (int run = 0; run < 2; ++run) EXPECT_EQ(snippets_to_json(segment_source(src, {}, 100), src).dump(), a) << p;
  }
}

TEST(Corpus, GoldenFiles) {
  std::size_t seen = 0;
  for (const auto& e : fs::directory_iterator(kCorpus / "golden")) {
    const auto g = json::parse(read_file(e.path().string()));
    const fs::path toy = kCorpus / (e.path().stem().string() + ".toy");
    const std::string src = read_file(toy.string());
    const auto got = segment_source(src, {g.at("max_size").get<std::size_t>(), std::nullopt},
                                    g.at("merge_threshold").get<std::size_t>());
    EXPECT_EQ(snippets_to_json(got, src), g.at("snippets")) << toy;
    ++seen;
  }
  EXPECT_EQ(seen, 5u);
}
