#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oek/error.hpp"

namespace oek {

// Toy grammar:
//   file       := item*
//   item       := whitespace | comment | statement
//   statement  := token+ (';' | block)      -- a block always ends the statement
//   token      := ident | number | string | punct | '(' group ')' | comment | whitespace
//   group      := (token | ';' | block)*
//   block      := '{' item* '}'
// Comments are '//' to end of line. Strings are double-quoted with '\' escapes.
// A statement whose first token is a type-ish keyword is a Declaration.

enum class NodeKind { Statement, Declaration, Comment, StringLiteral, Expression, Block, LeafOther };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Statement: return "Statement";
    case NodeKind::Declaration: return "Declaration";
    case NodeKind::Comment: return "Comment";
    case NodeKind::StringLiteral: return "StringLiteral";
    case NodeKind::Expression: return "Expression";
    case NodeKind::Block: return "Block";
    case NodeKind::LeafOther: return "Leaf";
  }
  return "?";
}

struct SyntaxNode {
  NodeKind kind = NodeKind::LeafOther;
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<SyntaxNode> children;

  bool is_leaf() const {
    return kind == NodeKind::Comment || kind == NodeKind::StringLiteral || kind == NodeKind::LeafOther;
  }
  std::string_view text(std::string_view source) const { return source.substr(start, end - start); }
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& msg)
      : Error(ErrorCode::ParseError, "offset " + std::to_string(offset) + ": " + msg), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline bool is_declaration_keyword(std::string_view w) {
  static constexpr std::string_view kw[] = {"int", "float", "char", "bool", "void", "let", "var", "const", "fn"};
  return std::find(std::begin(kw), std::end(kw), w) != std::end(kw);
}

class ToyParser {
 public:
  explicit ToyParser(std::string_view src) : s_(src) {}

  SyntaxNode parse_file() {
    SyntaxNode root{NodeKind::Block, 0, s_.size(), {}};
    parse_items(root, false);
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  bool at_comment() const { return pos_ + 1 < s_.size() && s_[pos_] == '/' && s_[pos_ + 1] == '/'; }

  SyntaxNode leaf(NodeKind k, std::size_t b) const { return {k, b, pos_, {}}; }

  SyntaxNode whitespace() {
    const std::size_t b = pos_;
    while (!eof() && is_space(peek())) ++pos_;
    return leaf(NodeKind::LeafOther, b);
  }

  SyntaxNode comment() {
    const std::size_t b = pos_;
    while (!eof() && peek() != '\n') ++pos_;
    return leaf(NodeKind::Comment, b);
  }

  SyntaxNode string_literal() {
    const std::size_t b = pos_++;
    while (true) {
      if (eof()) throw ParseError(b, "unterminated string literal");
      const char c = s_[pos_++];
      if (c == '\\') {
        if (eof()) throw ParseError(b, "unterminated string literal");
        ++pos_;
      } else if (c == '"') {
        break;
      }
    }
    return leaf(NodeKind::StringLiteral, b);
  }

  SyntaxNode word() {
    const std::size_t b = pos_;
    if (is_ident_start(peek()) || std::isdigit(static_cast<unsigned char>(peek()))) {
      while (!eof() && (is_ident_char(peek()) || peek() == '.')) {
        if (peek() == '.' && !std::isdigit(static_cast<unsigned char>(s_[b]))) break;
        ++pos_;
      }
    } else {
      ++pos_;
    }
    return leaf(NodeKind::LeafOther, b);
  }

  /// Items until '}' (inside a block) or EOF (top level).
  void parse_items(SyntaxNode& parent, bool in_block) {
    while (!eof()) {
      const char c = peek();
      if (is_space(c)) {
        parent.children.push_back(whitespace());
      } else if (at_comment()) {
        parent.children.push_back(comment());
      } else if (c == '}') {
        if (!in_block) throw ParseError(pos_, "unbalanced '}'");
        return;
      } else if (c == ')') {
        throw ParseError(pos_, "unbalanced ')'");
      } else {
        parent.children.push_back(statement());
      }
    }
  }

  SyntaxNode block() {
    SyntaxNode b{NodeKind::Block, pos_, 0, {}};
    const std::size_t open = pos_++;
    b.children.push_back({NodeKind::LeafOther, open, pos_, {}});
    parse_items(b, true);
    if (eof()) throw ParseError(open, "unterminated block");
    const std::size_t close = pos_++;
    b.children.push_back({NodeKind::LeafOther, close, pos_, {}});
    b.end = pos_;
    return b;
  }

  SyntaxNode group() {
    SyntaxNode g{NodeKind::Expression, pos_, 0, {}};
    const std::size_t open = pos_++;
    g.children.push_back({NodeKind::LeafOther, open, pos_, {}});
    while (true) {
      if (eof()) throw ParseError(open, "unbalanced '('");
      const char c = peek();
      if (c == ')') break;
      if (c == '}') throw ParseError(pos_, "unbalanced '}'");
      if (c == '{')
        g.children.push_back(block());
      else
        g.children.push_back(token());
    }
    const std::size_t close = pos_++;
    g.children.push_back({NodeKind::LeafOther, close, pos_, {}});
    g.end = pos_;
    return g;
  }

  SyntaxNode token() {
    const char c = peek();
    if (is_space(c)) return whitespace();
    if (at_comment()) return comment();
    if (c == '"') return string_literal();
    if (c == '(') return group();
    if (c == ')') throw ParseError(pos_, "unbalanced ')'");
    return word();
  }

  SyntaxNode statement() {
    SyntaxNode st{NodeKind::Statement, pos_, 0, {}};
    const std::size_t b = pos_;
    if (is_ident_start(peek())) {
      std::size_t e = pos_;
      while (e < s_.size() && is_ident_char(s_[e])) ++e;
      if (is_declaration_keyword(s_.substr(pos_, e - pos_))) st.kind = NodeKind::Declaration;
    }
    while (true) {
      if (eof()) throw ParseError(b, "statement is missing ';'");
      const char c = peek();
      if (c == '}') throw ParseError(pos_, "statement is missing ';' before '}'");
      if (c == '{') {
        st.children.push_back(block());
        break;
      }
      if (c == ';') {
        ++pos_;
        st.children.push_back(leaf(NodeKind::LeafOther, pos_ - 1));
        break;
      }
      st.children.push_back(token());
    }
    st.end = pos_;
    return st;
  }
};

}  // namespace detail

inline SyntaxNode parse_toy(std::string_view source) { return detail::ToyParser(source).parse_file(); }

enum class SnippetType { Code, Text };

inline const char* to_string(SnippetType t) { return t == SnippetType::Code ? "code" : "text"; }

struct Snippet {
  std::size_t start = 0;
  std::size_t end = 0;
  SnippetType type = SnippetType::Code;
  std::size_t size = 0;  // non-whitespace characters in [start, end)

  bool operator==(const Snippet&) const = default;
};

inline std::size_t non_ws_count(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return !detail::is_space(c); }));
}

struct SegmentOptions {
  std::size_t max_size = 100;
  std::optional<std::size_t> max_expand_depth;  // upward steps; unlimited when empty
};

namespace detail {

struct FlatNode {
  const SyntaxNode* node;
  std::size_t parent;  // npos for the root
  std::size_t depth;
  std::vector<std::size_t> children;
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

inline std::vector<FlatNode> flatten(const SyntaxNode& root) {
  std::vector<FlatNode> out{{&root, npos, 0, {}}};
  // Breadth-first so that ids within a depth run left to right.
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const SyntaxNode& ch : out[i].node->children) {
      out[i].children.push_back(out.size());
      out.push_back({&ch, i, out[i].depth + 1, {}});
    }
  }
  return out;
}

class Segmenter {
 public:
  Segmenter(const SyntaxNode& root, std::string_view src, SegmentOptions opt)
      : src_(src), opt_(opt), nodes_(flatten(root)), visited_(nodes_.size(), false) {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].node->is_leaf() && has_text(i)) text_leaves_.push_back(i);
    std::sort(text_leaves_.begin(), text_leaves_.end(),
              [&](std::size_t a, std::size_t b) { return nodes_[a].node->start < nodes_[b].node->start; });
  }

  std::vector<Snippet> run() {
    std::size_t max_depth = 0;
    for (const auto& n : nodes_) max_depth = std::max(max_depth, n.depth);
    std::vector<Snippet> out;
    for (std::size_t d = max_depth + 1; d-- > 0;) {
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].depth != d || !nodes_[i].node->is_leaf() || !has_text(i) || visited_[i]) continue;
        out.push_back(grow(i));
      }
    }
    std::sort(out.begin(), out.end(), [](const Snippet& a, const Snippet& b) { return a.start < b.start; });
    return out;
  }

 private:
  std::string_view src_;
  SegmentOptions opt_;
  std::vector<FlatNode> nodes_;
  std::vector<bool> visited_;
  std::vector<std::size_t> text_leaves_;  // by source position

  bool has_text(std::size_t i) const { return non_ws_count(nodes_[i].node->text(src_)) > 0; }

  static bool climbable(NodeKind k) {
    return k == NodeKind::Statement || k == NodeKind::Declaration || k == NodeKind::Expression;
  }

  /// Unvisited text leaves under n, not descending into blocks.
  void collect(std::size_t n, std::vector<std::size_t>& acc) const {
    const SyntaxNode& sn = *nodes_[n].node;
    if (sn.is_leaf()) {
      if (!visited_[n] && has_text(n)) acc.push_back(n);
      return;
    }
    if (sn.kind == NodeKind::Block) return;
    for (std::size_t c : nodes_[n].children) collect(c, acc);
  }

  std::size_t size_of(const std::vector<std::size_t>& leaves) const {
    std::size_t s = 0;
    for (std::size_t l : leaves) s += non_ws_count(nodes_[l].node->text(src_));
    return s;
  }

  /// True when no text leaf outside the set falls between its first and last leaf.
  bool contiguous(const std::vector<std::size_t>& leaves) const {
    std::size_t lo = src_.size(), hi = 0;
    for (std::size_t l : leaves) lo = std::min(lo, nodes_[l].node->start), hi = std::max(hi, nodes_[l].node->end);
    std::size_t inside = 0;
    for (std::size_t l : text_leaves_) {
      const auto* n = nodes_[l].node;
      if (n->start >= lo && n->end <= hi) ++inside;
    }
    return inside == leaves.size();
  }

  Snippet grow(std::size_t seed) {
    const NodeKind sk = nodes_[seed].node->kind;
    SnippetType type = (sk == NodeKind::Comment || sk == NodeKind::StringLiteral) ? SnippetType::Text : SnippetType::Code;
    std::vector<std::size_t> leaves{seed};
    std::size_t at = seed, steps = 0;
    while (nodes_[at].parent != npos) {
      if (opt_.max_expand_depth && steps >= *opt_.max_expand_depth) break;
      const std::size_t p = nodes_[at].parent;
      if (!climbable(nodes_[p].node->kind)) break;
      std::vector<std::size_t> cand;
      for (std::size_t c : nodes_[p].children) {
        if (nodes_[c].node->kind == NodeKind::Block) continue;
        collect(c, cand);
      }
      // Leaves already in the snippet are unvisited too, so they reappear here.
      if (std::find(cand.begin(), cand.end(), seed) == cand.end()) cand.push_back(seed);
      if (size_of(cand) > opt_.max_size || !contiguous(cand)) break;
      leaves = std::move(cand);
      type = SnippetType::Code;
      at = p;
      ++steps;
    }
    for (std::size_t l : leaves) visited_[l] = true;

    Snippet s{src_.size(), 0, type, size_of(leaves)};
    for (std::size_t l : leaves) {
      const auto* n = nodes_[l].node;
      std::size_t b = n->start, e = n->end;
      while (b < e && is_space(src_[b])) ++b;
      while (e > b && is_space(src_[e - 1])) --e;
      s.start = std::min(s.start, b);
      s.end = std::max(s.end, e);
    }
    return s;
  }
};

}  // namespace detail

/// Bottom-up level-order segmentation. Each unvisited leaf with text seeds a
/// snippet that climbs through statement, declaration and parenthesised
/// expression parents while the result stays within max_size and contiguous.
/// Output is ordered by start offset.
inline std::vector<Snippet> segment(const SyntaxNode& tree, std::string_view source, SegmentOptions opt = {}) {
  require(opt.max_size >= 1, ErrorCode::InvalidArgument, "max_size must be >= 1");
  require(tree.end == source.size(), ErrorCode::InvalidArgument, "tree does not span the source");
  return detail::Segmenter(tree, source, opt).run();
}

inline std::vector<Snippet> segment(const SyntaxNode& tree, std::string_view source, std::size_t max_size) {
  return segment(tree, source, SegmentOptions{max_size, std::nullopt});
}

namespace detail {

inline bool whitespace_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return is_space(c); });
}

}  // namespace detail

/// Merges same-type neighbours separated only by whitespace while the merged
/// size stays <= merge_threshold, then snaps each boundary to the nearest
/// newline inside the surrounding whitespace gap.
inline std::vector<Snippet> merge_postprocess(const std::vector<Snippet>& snippets, std::string_view source,
                                              std::size_t merge_threshold) {
  // Work on whitespace-trimmed cores so a second pass sees the same input.
  std::vector<Snippet> cores;
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    Snippet s = snippets[i];
    require(s.start <= s.end && s.end <= source.size(), ErrorCode::OverlapDetected,
            "snippet " + std::to_string(i) + " lies outside the source");
    if (i > 0)
      require(snippets[i - 1].end <= s.start, ErrorCode::OverlapDetected,
              "snippets " + std::to_string(i - 1) + " and " + std::to_string(i) + " overlap or are out of order");
    while (s.start < s.end && detail::is_space(source[s.start])) ++s.start;
    while (s.end > s.start && detail::is_space(source[s.end - 1])) --s.end;
    s.size = non_ws_count(source.substr(s.start, s.end - s.start));
    cores.push_back(s);
  }

  std::vector<Snippet> merged;
  for (const Snippet& s : cores) {
    if (!merged.empty()) {
      Snippet& last = merged.back();
      if (last.type == s.type && last.size + s.size <= merge_threshold &&
          detail::whitespace_only(source.substr(last.end, s.start - last.end))) {
        last.end = s.end;
        last.size += s.size;
        continue;
      }
    }
    merged.push_back(s);
  }

  std::vector<Snippet> out = merged;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const std::size_t gap_lo = i == 0 ? 0 : merged[i - 1].end;
    const std::string_view before = source.substr(gap_lo, merged[i].start - gap_lo);
    if (detail::whitespace_only(before)) {
      const auto nl = before.rfind('\n');
      if (nl != std::string_view::npos) out[i].start = gap_lo + nl + 1;
    }
    const std::size_t gap_hi = i + 1 == merged.size() ? source.size() : merged[i + 1].start;
    const std::string_view after = source.substr(merged[i].end, gap_hi - merged[i].end);
    if (detail::whitespace_only(after)) {
      const auto nl = after.find('\n');
      if (nl != std::string_view::npos) out[i].end = merged[i].end + nl + 1;
    }
  }
  return out;
}

/// Parse, segment and postprocess in one call.
inline std::vector<Snippet> segment_source(std::string_view source, SegmentOptions opt, std::size_t merge_threshold) {
  return merge_postprocess(segment(parse_toy(source), source, opt), source, merge_threshold);
}

}  // namespace oek
