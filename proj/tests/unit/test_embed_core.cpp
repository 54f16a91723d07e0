#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oek/embed_core.hpp"
#include "oek/random.hpp"

using namespace oek;

namespace {

Matrix random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  Matrix m(n, d);
  for (double& v : m.flat()) v = standard_normal(rng);
  return m;
}

}  // namespace

TEST(Cosine, IdenticalUnitVectors) {
  const std::vector<double> u{1, 0};
  EXPECT_DOUBLE_EQ(cosine(u, u), 1.0);
}

TEST(Cosine, Orthogonal) {
  const std::vector<double> u{1, 0}, v{0, 1};
  EXPECT_DOUBLE_EQ(cosine(u, v), 0.0);
}

TEST(Cosine, ArithmeticOracle) {
  const std::vector<double> u{1, 2}, v{3, 4};
  EXPECT_NEAR(cosine(u, v), 11.0 / (std::sqrt(5.0) * 5.0), 1e-15);
  EXPECT_NEAR(cosine(u, v), 0.98386991, 1e-8);
}

TEST(Cosine, Errors) {
  const std::vector<double> z{0, 0}, u{1, 0}, w{1, 0, 0};
  try {
    cosine(z, u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroNorm);
  }
  try {
    cosine(u, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimMismatch);
  }
}

TEST(Cosine, ScaleInvarianceAndSymmetry) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + uniform_index(16, rng);
    std::vector<double> u(d), v(d), au(d);
    for (std::size_t k = 0; k < d; ++k) u[k] = standard_normal(rng), v[k] = standard_normal(rng);
    const double a = std::exp(4.0 * standard_normal(rng));
    for (std::size_t k = 0; k < d; ++k) au[k] = a * u[k];
    EXPECT_NEAR(cosine(au, v), cosine(u, v), 1e-12);
    EXPECT_DOUBLE_EQ(cosine(u, v), cosine(v, u));
    EXPECT_LE(std::abs(cosine(u, v)), 1.0 + 1e-15);
  }
}

TEST(SimilarityMatrix, IdentityBatch) {
  EmbeddingBatch x(Matrix::identity(3));
  const auto s = similarity_matrix(x, x, 1.0);
  EXPECT_EQ(s.kind, SimilarityKind::Cosine);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(s.entries(i, j), i == j ? 1.0 : 0.0);
}

TEST(SimilarityMatrix, LinearInScaleAndTransposeSymmetric) {
  std::mt19937_64 rng(5);
  EmbeddingBatch x(random_rows(4, 6, rng)), y(random_rows(3, 6, rng));
  const auto s1 = similarity_matrix(x, y, 1.0);
  const auto s100 = similarity_matrix(x, y, 100.0);
  const auto t = similarity_matrix(y, x, 100.0);
  EXPECT_EQ(s100.kind, SimilarityKind::ScaledCosine);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(s100.entries(i, j), 100.0 * s1.entries(i, j), 1e-12);
      EXPECT_DOUBLE_EQ(s100.entries(i, j), t.entries(j, i));
    }
}

TEST(SimilarityMatrix, LoopOracle) {
  std::mt19937_64 rng(7);
  const Matrix x = random_rows(2, 2, rng), y = random_rows(2, 2, rng);
  const auto s = similarity_matrix(EmbeddingBatch(x), EmbeddingBatch(y), 2.5);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const double num = x(i, 0) * y(j, 0) + x(i, 1) * y(j, 1);
      const double den = std::hypot(x(i, 0), x(i, 1)) * std::hypot(y(j, 0), y(j, 1));
      EXPECT_NEAR(s.entries(i, j), 2.5 * num / den, 1e-12);
    }
}

TEST(SimilarityMatrix, ReportsOffendingRow) {
  Matrix x(2, 2, 1.0);
  x(1, 0) = x(1, 1) = 0.0;
  try {
    similarity_matrix(EmbeddingBatch(x), EmbeddingBatch(Matrix::identity(2)), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroNorm);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
  EXPECT_THROW(similarity_matrix(EmbeddingBatch(Matrix::identity(2)), EmbeddingBatch(Matrix::identity(3)), 1.0),
               Error);
}

TEST(LogSumExp, Examples) {
  EXPECT_DOUBLE_EQ(log_sum_exp(std::vector<double>{0.0}), 0.0);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{0.0, 0.0}), std::log(2.0), 1e-15);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-12);
  try {
    log_sum_exp(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(LogSumExp, ShiftIdentityAndRange) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + uniform_index(10, rng);
    std::vector<double> xs(n), shifted(n);
    const double c = 1e5 * (2.0 * uniform01(rng) - 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      xs[k] = 1e6 * (2.0 * uniform01(rng) - 1.0);
      shifted[k] = xs[k] + c;
    }
    const double a = log_sum_exp(xs);
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_NEAR(log_sum_exp(shifted), a + c, 1e-9 * std::max(1.0, std::abs(a + c)));
  }
}

TEST(EmbeddingBatch, TagCountMustMatch) {
  EXPECT_THROW(EmbeddingBatch(Matrix(2, 3), std::vector<LangTag>(1)), Error);
  EmbeddingBatch b(Matrix(2, 3), std::vector<LangTag>(2));
  EXPECT_EQ(b.size(), 2u);
  EXPECT_EQ(b.dim(), 3u);
}
