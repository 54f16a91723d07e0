#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oek/embed_core.hpp"
#include "oek/parallel.hpp"

namespace oek {

/// Gold targets (index-aligned with the queries) plus optional extra
/// candidates appended after them.
struct CandidatePool {
  Matrix targets;
  std::optional<Matrix> hard_negatives;

  std::size_t size() const { return targets.rows() + (hard_negatives ? hard_negatives->rows() : 0); }
};

struct RetrievalReport {
  double error_rate_percent = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> mispaired;  // (query, retrieved pool index)
  std::size_t queries = 0;
  std::size_t pool_size = 0;

  bool operator==(const RetrievalReport&) const = default;
};

namespace detail {

/// Highest-cosine pool row for every query. Exact ties go to the lowest
/// pool index: targets come first, then hard negatives.
inline std::vector<std::size_t> nearest_candidates(const Matrix& queries, const CandidatePool& pool, unsigned threads) {
  check_same_dim(queries.cols(), pool.targets.cols(), "queries vs targets");
  if (pool.hard_negatives) check_same_dim(queries.cols(), pool.hard_negatives->cols(), "queries vs hard negatives");
  const auto qn = row_norms(queries, "queries");
  const auto tn = row_norms(pool.targets, "targets");
  const auto hn = pool.hard_negatives ? row_norms(*pool.hard_negatives, "hard_negatives") : std::vector<double>{};
  std::vector<std::size_t> best(queries.rows(), 0);
  parallel_for(queries.rows(), threads, [&](std::size_t i) {
    double best_score = -2.0;
    std::size_t best_j = 0;
    const auto q = queries.row(i);
    for (std::size_t j = 0; j < pool.targets.rows(); ++j) {
      const double c = dot(q, pool.targets.row(j)) / (qn[i] * tn[j]);
      if (c > best_score) best_score = c, best_j = j;
    }
    if (pool.hard_negatives) {
      const std::size_t off = pool.targets.rows();
      for (std::size_t j = 0; j < pool.hard_negatives->rows(); ++j) {
        const double c = dot(q, pool.hard_negatives->row(j)) / (qn[i] * hn[j]);
        if (c > best_score) best_score = c, best_j = off + j;
      }
    }
    best[i] = best_j;
  });
  return best;
}

inline RetrievalReport report_from_nearest(const std::vector<std::size_t>& nearest, std::size_t pool_size) {
  RetrievalReport r;
  r.queries = nearest.size();
  r.pool_size = pool_size;
  for (std::size_t i = 0; i < nearest.size(); ++i)
    if (nearest[i] != i) r.mispaired.emplace_back(i, nearest[i]);
  r.error_rate_percent = nearest.empty() ? 0.0 : 100.0 * static_cast<double>(r.mispaired.size()) / nearest.size();
  return r;
}

}  // namespace detail

/// Similarity-search error rate: percentage of queries whose nearest
/// candidate is not their own target.
inline RetrievalReport xsim(const Matrix& queries, const CandidatePool& pool, unsigned threads = 1) {
  require(queries.rows() >= 1, ErrorCode::EmptyInput, "xsim needs at least one query");
  require(pool.targets.rows() == queries.rows(), ErrorCode::InvalidPool,
          "pool has " + std::to_string(pool.targets.rows()) + " targets for " + std::to_string(queries.rows()) +
              " queries");
  return detail::report_from_nearest(detail::nearest_candidates(queries, pool, threads), pool.size());
}

/// xsim over targets plus hard negatives; retrieving any hard negative counts
/// as an error.
inline RetrievalReport xsimpp(const Matrix& queries, const CandidatePool& pool, unsigned threads = 1) {
  require(pool.hard_negatives && pool.hard_negatives->rows() > 0, ErrorCode::InvalidPool,
          "xsim++ needs a non-empty hard-negative set");
  return xsim(queries, pool, threads);
}

/// Accuracy of each language relative to the reference language.
inline std::map<std::string, double> clt_ratio(const std::map<std::string, double>& per_language_accuracy,
                                               const std::string& reference_lang) {
  auto ref = per_language_accuracy.find(reference_lang);
  require(ref != per_language_accuracy.end(), ErrorCode::MissingReference,
          "reference language '" + reference_lang + "' has no accuracy");
  require(ref->second > 0.0, ErrorCode::ZeroReferenceAccuracy, "reference accuracy must be > 0");
  std::map<std::string, double> out;
  for (const auto& [lang, acc] : per_language_accuracy) out[lang] = lang == reference_lang ? 1.0 : acc / ref->second;
  return out;
}

/// Mean of the ratios, as a percentage.
inline double mean_clt_percent(const std::map<std::string, double>& ratios) {
  require(!ratios.empty(), ErrorCode::EmptyInput, "no ratios to average");
  double s = 0.0;
  for (const auto& [lang, r] : ratios) s += r;
  return 100.0 * s / static_cast<double>(ratios.size());
}

/// Average tokens per sentence.
inline double fertility(std::span<const std::size_t> token_counts) {
  require(!token_counts.empty(), ErrorCode::EmptyInput, "fertility of an empty corpus");
  double s = 0.0;
  for (std::size_t c : token_counts) s += static_cast<double>(c);
  return s / static_cast<double>(token_counts.size());
}

}  // namespace oek
