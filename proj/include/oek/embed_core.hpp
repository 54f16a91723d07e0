#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "oek/error.hpp"
#include "oek/matrix.hpp"

namespace oek {

using Embedding = std::span<const double>;

enum class LangClass { Foundational, New };

inline std::string to_string(LangClass c) { return c == LangClass::Foundational ? "foundational" : "new"; }

inline LangClass lang_class_from_string(const std::string& s) {
  if (s == "foundational") return LangClass::Foundational;
  if (s == "new") return LangClass::New;
  fail(ErrorCode::FormatError, "unknown language class '" + s + "'");
}

struct LangTag {
  std::string language_id;
  LangClass lang_class = LangClass::Foundational;
  bool is_english_source = false;

  bool operator==(const LangTag&) const = default;
};

/// N embeddings of equal dimension plus one tag per row.
struct EmbeddingBatch {
  Matrix rows;
  std::vector<LangTag> tags;

  EmbeddingBatch() = default;
  explicit EmbeddingBatch(Matrix m) : rows(std::move(m)), tags(rows.rows()) {}
  EmbeddingBatch(Matrix m, std::vector<LangTag> t) : rows(std::move(m)), tags(std::move(t)) {
    require(tags.size() == rows.rows(), ErrorCode::LengthMismatch,
            "batch has " + std::to_string(rows.rows()) + " rows but " + std::to_string(tags.size()) +
                " tags");
  }

  std::size_t size() const noexcept { return rows.rows(); }
  std::size_t dim() const noexcept { return rows.cols(); }
};

enum class SimilarityKind { Cosine, ScaledCosine };

struct SimilarityMatrix {
  Matrix entries;
  SimilarityKind kind = SimilarityKind::Cosine;
  double scale = 1.0;
};

inline void check_same_dim(std::size_t a, std::size_t b, const std::string& what) {
  require(a == b, ErrorCode::DimMismatch,
          what + ": dims " + std::to_string(a) + " and " + std::to_string(b) + " differ");
}

inline double cosine(Embedding u, Embedding v) {
  check_same_dim(u.size(), v.size(), "cosine");
  const double nu = norm(u);
  const double nv = norm(v);
  require(nu > 0.0 && nv > 0.0, ErrorCode::ZeroNorm, "cosine of a zero-norm embedding");
  return dot(u, v) / (nu * nv);
}

/// d cos(u, v) / du, given the precomputed cosine and norms.
inline void add_cosine_grad(double scale, Embedding u, Embedding v, double cos_uv, double norm_u,
                            double norm_v, std::span<double> out) {
  const double a = scale / (norm_u * norm_v);
  const double b = scale * cos_uv / (norm_u * norm_u);
  for (std::size_t k = 0; k < u.size(); ++k) out[k] += a * v[k] - b * u[k];
}

/// Row norms of a matrix; throws ZeroNorm naming the first zero row.
inline std::vector<double> row_norms(const Matrix& m, const std::string& what) {
  std::vector<double> n(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    n[i] = norm(m.row(i));
    require(n[i] > 0.0, ErrorCode::ZeroNorm, what + " row " + std::to_string(i) + " has zero norm");
    require(std::isfinite(n[i]), ErrorCode::NonFinite, what + " row " + std::to_string(i) + " is not finite");
  }
  return n;
}

/// entries[i][j] = scale * cos(X_i, Y_j).
inline Matrix scaled_cosine_matrix(const Matrix& x, const Matrix& y, double scale) {
  check_same_dim(x.cols(), y.cols(), "similarity_matrix");
  const auto nx = row_norms(x, "X");
  const auto ny = row_norms(y, "Y");
  Matrix s(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) s(i, j) = scale * (dot(x.row(i), y.row(j)) / (nx[i] * ny[j]));
  return s;
}

inline SimilarityMatrix similarity_matrix(const EmbeddingBatch& x, const EmbeddingBatch& y, double tau) {
  require(tau > 0.0 && std::isfinite(tau), ErrorCode::InvalidArgument, "similarity scale must be > 0");
  SimilarityMatrix out;
  out.entries = scaled_cosine_matrix(x.rows, y.rows, tau);
  out.kind = tau == 1.0 ? SimilarityKind::Cosine : SimilarityKind::ScaledCosine;
  out.scale = tau;
  return out;
}

inline double log_sum_exp(std::span<const double> xs) {
  require(!xs.empty(), ErrorCode::EmptyInput, "log_sum_exp of an empty sequence");
  const double mx = *std::max_element(xs.begin(), xs.end());
  require(std::isfinite(mx), ErrorCode::NonFinite, "log_sum_exp input is not finite");
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

/// Numerically stable softmax, written into `out`.
inline void softmax(std::span<const double> xs, std::span<double> out) {
  const double lse = log_sum_exp(xs);
  for (std::size_t k = 0; k < xs.size(); ++k) out[k] = std::exp(xs[k] - lse);
}

}  // namespace oek
