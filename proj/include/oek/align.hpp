#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oek/distill.hpp"
#include "oek/embed_core.hpp"
#include "oek/losses.hpp"

namespace oek {

using Link = std::pair<std::size_t, std::size_t>;  // (source index, target index)

struct AlignmentSet {
  std::set<Link> links;
  std::size_t n_src = 0;
  std::size_t n_tgt = 0;

  bool contains(std::size_t i, std::size_t j) const { return links.count({i, j}) > 0; }
  std::size_t size() const { return links.size(); }

  void add(std::size_t i, std::size_t j) {
    require(i < n_src && j < n_tgt, ErrorCode::IndexOutOfRange,
            "link " + std::to_string(i) + "-" + std::to_string(j) + " outside " + std::to_string(n_src) + "x" +
                std::to_string(n_tgt));
    links.emplace(i, j);
  }

  bool operator==(const AlignmentSet&) const = default;
};

struct GoldAlignment {
  AlignmentSet sure;
  AlignmentSet possible;  // always a superset of sure
};

struct TokenObjectiveConfig {
  double lambda = 1.0;
  double temperature = 500.0;

  bool operator==(const TokenObjectiveConfig&) const = default;
};

/// How the self-objective turns aligned softmax mass into a loss.
/// NegLog minimises -log of the aligned mass; RawMass is the literal sum of
/// aligned softmax mass divided by the sentence lengths.
enum class SoConvention { NegLog, RawMass };

namespace detail {

inline std::size_t row_argmax(const Matrix& s, std::size_t i) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < s.cols(); ++j)
    if (s(i, j) > s(i, best)) best = j;
  return best;
}

inline std::size_t col_argmax(const Matrix& s, std::size_t j) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.rows(); ++i)
    if (s(i, j) > s(best, j)) best = i;
  return best;
}

inline void require_finite(const Matrix& s) {
  require(s.all_finite(), ErrorCode::NonFinite, "similarity matrix is not finite");
}

}  // namespace detail

/// Mutual argmax: (i, j) is linked when j is row i's best column and i is
/// column j's best row. Ties resolve to the lowest index.
inline AlignmentSet argmax_align(const Matrix& s) {
  detail::require_finite(s);
  AlignmentSet out{{}, s.rows(), s.cols()};
  if (s.rows() == 0 || s.cols() == 0) return out;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const std::size_t j = detail::row_argmax(s, i);
    if (detail::col_argmax(s, j) == i) out.links.emplace(i, j);
  }
  return out;
}

/// Iterative mutual argmax. After each round, scores in rows or columns that
/// already hold a link are multiplied by alpha (cells whose row and column
/// are both linked drop to zero) and a new mutual argmax adds links that
/// touch at least one unlinked row or column. Stops when a round adds
/// nothing or every row or every column is linked.
inline AlignmentSet itermax_align(const Matrix& s, double alpha = 0.9, int iterations = 2) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidArgument, "itermax alpha must lie in (0, 1]");
  require(iterations >= 1, ErrorCode::InvalidArgument, "itermax needs at least one iteration");
  AlignmentSet out = argmax_align(s);
  const std::size_t m = s.rows(), n = s.cols();
  if (m == 0 || n == 0) return out;
  for (int it = 1; it < iterations; ++it) {
    std::vector<bool> row_linked(m, false), col_linked(n, false);
    for (const auto& [i, j] : out.links) row_linked[i] = col_linked[j] = true;
    const bool rows_left = std::find(row_linked.begin(), row_linked.end(), false) != row_linked.end();
    const bool cols_left = std::find(col_linked.begin(), col_linked.end(), false) != col_linked.end();
    if (!rows_left || !cols_left) break;

    Matrix discounted(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double w = std::min(1.0, alpha * (row_linked[i] ? 0.0 : 1.0) + alpha * (col_linked[j] ? 0.0 : 1.0));
        discounted(i, j) = s(i, j) * w;
      }
    std::size_t added = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = detail::row_argmax(discounted, i);
      if (row_linked[i] && col_linked[j]) continue;
      if (detail::col_argmax(discounted, j) != i) continue;
      added += out.links.emplace(i, j).second ? 1 : 0;
    }
    if (added == 0) break;
  }
  return out;
}

/// Half-open token range [begin, end) covered by one word.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
};

namespace detail {

/// Token -> word lookup; spans must tile [0, n_tokens) in order.
inline std::vector<std::size_t> word_of_token(const std::vector<Span>& spans, std::size_t n_tokens,
                                              const std::string& side) {
  std::vector<std::size_t> owner(n_tokens);
  std::size_t expected = 0;
  for (std::size_t w = 0; w < spans.size(); ++w) {
    require(spans[w].begin == expected && spans[w].end > spans[w].begin && spans[w].end <= n_tokens,
            ErrorCode::SpanGap, side + " word " + std::to_string(w) + " does not continue the token partition");
    for (std::size_t t = spans[w].begin; t < spans[w].end; ++t) owner[t] = w;
    expected = spans[w].end;
  }
  require(expected == n_tokens, ErrorCode::SpanGap,
          side + " spans cover " + std::to_string(expected) + " of " + std::to_string(n_tokens) + " tokens");
  return owner;
}

}  // namespace detail

/// Word (a, b) is linked when any token of a links to any token of b.
inline AlignmentSet subword_to_word(const AlignmentSet& token_links, const std::vector<Span>& src_spans,
                                   const std::vector<Span>& tgt_spans) {
  const auto src_owner = detail::word_of_token(src_spans, token_links.n_src, "source");
  const auto tgt_owner = detail::word_of_token(tgt_spans, token_links.n_tgt, "target");
  AlignmentSet out{{}, src_spans.size(), tgt_spans.size()};
  for (const auto& [i, j] : token_links.links) out.links.emplace(src_owner[i], tgt_owner[j]);
  return out;
}

/// Alignment error rate 1 - (|A∩S| + |A∩P|) / (|A| + |S|); 0 when both are empty.
inline double aer(const AlignmentSet& predicted, const GoldAlignment& gold) {
  std::size_t a_s = 0, a_p = 0;
  for (const Link& l : predicted.links) {
    a_s += gold.sure.links.count(l);
    a_p += gold.possible.links.count(l);
  }
  const std::size_t denom = predicted.size() + gold.sure.size();
  if (denom == 0) return 0.0;
  return 1.0 - static_cast<double>(a_s + a_p) / static_cast<double>(denom);
}

/// AER pooled over a corpus: the counts are summed before dividing.
inline double corpus_aer(const std::vector<AlignmentSet>& predicted, const std::vector<GoldAlignment>& gold) {
  require(predicted.size() == gold.size(), ErrorCode::LengthMismatch, "prediction and gold sentence counts differ");
  std::size_t a_s = 0, a_p = 0, denom = 0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    for (const Link& l : predicted[k].links) {
      a_s += gold[k].sure.links.count(l);
      a_p += gold[k].possible.links.count(l);
    }
    denom += predicted[k].size() + gold[k].sure.size();
  }
  return denom == 0 ? 0.0 : 1.0 - static_cast<double>(a_s + a_p) / static_cast<double>(denom);
}

/// Pharaoh line: "i-j" is a sure link, "i?j" a possible-only link.
inline GoldAlignment parse_pharaoh(const std::string& line, std::size_t n_src, std::size_t n_tgt) {
  GoldAlignment g{{{}, n_src, n_tgt}, {{}, n_src, n_tgt}};
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    const auto sep = tok.find_first_of("-?");
    require(sep != std::string::npos && sep > 0 && sep + 1 < tok.size(), ErrorCode::FormatError,
            "bad alignment token '" + tok + "'");
    std::size_t i = 0, j = 0;
    try {
      std::size_t used = 0;
      i = std::stoul(tok.substr(0, sep), &used);
      require(used == sep, ErrorCode::FormatError, "bad alignment token '" + tok + "'");
      j = std::stoul(tok.substr(sep + 1), &used);
      require(used == tok.size() - sep - 1, ErrorCode::FormatError, "bad alignment token '" + tok + "'");
    } catch (const std::logic_error&) {
      fail(ErrorCode::FormatError, "bad alignment token '" + tok + "'");
    }
    if (tok[sep] == '-') g.sure.add(i, j);
    g.possible.add(i, j);
  }
  return g;
}

/// Bounds inferred from the largest indices on the line.
inline GoldAlignment parse_pharaoh(const std::string& line) {
  constexpr std::size_t unbounded = static_cast<std::size_t>(-1);
  GoldAlignment g = parse_pharaoh(line, unbounded, unbounded);
  std::size_t ns = 0, nt = 0;
  for (const auto& [i, j] : g.possible.links) ns = std::max(ns, i + 1), nt = std::max(nt, j + 1);
  g.sure.n_src = g.possible.n_src = ns;
  g.sure.n_tgt = g.possible.n_tgt = nt;
  return g;
}

inline std::string to_pharaoh(const AlignmentSet& a) {
  std::string s;
  for (const auto& [i, j] : a.links) {
    if (!s.empty()) s += ' ';
    s += std::to_string(i) + "-" + std::to_string(j);
  }
  return s;
}

/// Character range [begin, end) carrying a label, for sequence tagging.
struct LabeledSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  int label = 0;
};

/// Label of the labelled span with the largest character overlap with each
/// token span; the earliest span wins ties. Tokens with no overlap get none.
inline std::vector<std::optional<int>> assign_labels(const std::vector<Span>& token_char_spans,
                                                     const std::vector<LabeledSpan>& labeled) {
  std::vector<std::optional<int>> out(token_char_spans.size());
  for (std::size_t t = 0; t < token_char_spans.size(); ++t) {
    std::size_t best_overlap = 0;
    for (const LabeledSpan& l : labeled) {
      const std::size_t lo = std::max(token_char_spans[t].begin, l.begin);
      const std::size_t hi = std::min(token_char_spans[t].end, l.end);
      const std::size_t overlap = hi > lo ? hi - lo : 0;
      if (overlap > best_overlap) best_overlap = overlap, out[t] = l.label;
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> mean_rows(const Matrix& m) {
  std::vector<double> mu(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) axpy(1.0, m.row(i), mu);
  for (double& v : mu) v /= static_cast<double>(m.rows());
  return mu;
}

}  // namespace detail

/// Sentence-level teacher regulariser plus lambda times the token
/// self-objective. Sentence embeddings are token means; the alignment used by
/// the self-objective is the mutual argmax of the student cosine matrix and
/// is held fixed when differentiating.
inline LossOutput token_objective(const Matrix& student_src, const Matrix& student_tgt, const Matrix& teacher_src,
                                  const Matrix& teacher_tgt, const TokenObjectiveConfig& cfg,
                                  SoConvention convention = SoConvention::NegLog) {
  require(student_src.rows() >= 1 && student_tgt.rows() >= 1 && teacher_src.rows() >= 1 && teacher_tgt.rows() >= 1,
          ErrorCode::EmptyInput, "token_objective needs at least one token per sentence");
  check_same_dim(student_src.cols(), student_tgt.cols(), "student source vs target tokens");
  check_same_dim(teacher_src.cols(), teacher_tgt.cols(), "teacher source vs target tokens");
  check_same_dim(student_src.cols(), teacher_src.cols(), "student vs teacher tokens");
  require(cfg.lambda >= 0.0 && cfg.temperature > 0.0, ErrorCode::InvalidArgument,
          "token objective needs lambda >= 0 and temperature > 0");
  const std::size_t ls = student_src.rows(), lt = student_tgt.rows(), d = student_src.cols();

  // Teacher term on pooled sentences.
  std::vector<double> pooled = detail::mean_rows(student_src);
  axpy(1.0, detail::mean_rows(student_tgt), pooled);
  std::vector<double> pooled_teacher = detail::mean_rows(teacher_src);
  axpy(1.0, detail::mean_rows(teacher_tgt), pooled_teacher);
  const MseResult teacher = mse(pooled, pooled_teacher);

  Matrix gs(ls, d), gt(lt, d);
  for (std::size_t i = 0; i < ls; ++i) axpy(1.0 / static_cast<double>(ls), teacher.grad, gs.row(i));
  for (std::size_t j = 0; j < lt; ++j) axpy(1.0 / static_cast<double>(lt), teacher.grad, gt.row(j));

  // Self-objective over the mutual-argmax links.
  const auto table = detail::cosine_table(student_src, student_tgt, "student_src", "student_tgt");
  const AlignmentSet links = argmax_align(table.cos);
  const double tau = cfg.temperature;
  Matrix row_p(ls, lt), col_p(ls, lt);
  std::vector<double> row_lse(ls), col_lse(lt);
  {
    std::vector<double> buf(std::max(ls, lt));
    for (std::size_t i = 0; i < ls; ++i) {
      for (std::size_t j = 0; j < lt; ++j) buf[j] = tau * table.cos(i, j);
      row_lse[i] = log_sum_exp(std::span<const double>(buf.data(), lt));
      for (std::size_t j = 0; j < lt; ++j) row_p(i, j) = std::exp(buf[j] - row_lse[i]);
    }
    for (std::size_t j = 0; j < lt; ++j) {
      for (std::size_t i = 0; i < ls; ++i) buf[i] = tau * table.cos(i, j);
      col_lse[j] = log_sum_exp(std::span<const double>(buf.data(), ls));
      for (std::size_t i = 0; i < ls; ++i) col_p(i, j) = std::exp(buf[i] - col_lse[j]);
    }
  }

  // dSO/dcos(i, j) accumulated here, then pushed through the cosines.
  Matrix dcos(ls, lt);
  double so = 0.0;
  if (!links.links.empty()) {
    if (convention == SoConvention::NegLog) {
      const double w = 0.5 / static_cast<double>(links.size());
      for (const auto& [i, j] : links.links) {
        so -= w * ((tau * table.cos(i, j) - row_lse[i]) + (tau * table.cos(i, j) - col_lse[j]));
        // d(-log p_row(i,j)) / dS(i,k) = tau * (p_row(i,k) - [k == j])
        for (std::size_t k = 0; k < lt; ++k) dcos(i, k) += w * tau * (row_p(i, k) - (k == j ? 1.0 : 0.0));
        for (std::size_t k = 0; k < ls; ++k) dcos(k, j) += w * tau * (col_p(k, j) - (k == i ? 1.0 : 0.0));
      }
    } else {
      const double wr = 0.5 / static_cast<double>(lt);
      const double wc = 0.5 / static_cast<double>(ls);
      for (const auto& [i, j] : links.links) {
        so += wr * row_p(i, j) + wc * col_p(i, j);
        // d p_row(i,j) / dS(i,k) = tau * p_row(i,j) * ([k == j] - p_row(i,k))
        for (std::size_t k = 0; k < lt; ++k)
          dcos(i, k) += wr * tau * row_p(i, j) * ((k == j ? 1.0 : 0.0) - row_p(i, k));
        for (std::size_t k = 0; k < ls; ++k)
          dcos(k, j) += wc * tau * col_p(i, j) * ((k == i ? 1.0 : 0.0) - col_p(k, j));
      }
    }
    for (std::size_t i = 0; i < ls; ++i)
      for (std::size_t j = 0; j < lt; ++j) {
        const double g = cfg.lambda * dcos(i, j);
        if (g == 0.0) continue;
        add_cosine_grad(g, student_src.row(i), student_tgt.row(j), table.cos(i, j), table.norm_a[i], table.norm_b[j],
                        gs.row(i));
        add_cosine_grad(g, student_tgt.row(j), student_src.row(i), table.cos(i, j), table.norm_b[j], table.norm_a[i],
                        gt.row(j));
      }
  }

  LossOutput out;
  out.value = teacher.value + cfg.lambda * so;
  out.per_example = {out.value};
  out.grads[grad::student_src_tokens] = std::move(gs);
  out.grads[grad::student_tgt_tokens] = std::move(gt);
  detail::check_finite_output(out, "token_objective");
  return out;
}

}  // namespace oek
