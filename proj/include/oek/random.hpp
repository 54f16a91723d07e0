#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include "oek/distill.hpp"
#include "oek/matrix.hpp"

namespace oek {

/// Standard normal via Box-Muller on uniform01. Spelled out so generated
/// data does not depend on the standard library's distribution code.
inline double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Index in [0, n) with probability proportional to weights.
inline std::size_t sample_index(std::span<const double> weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

/// Integer in [0, n).
inline std::size_t uniform_index(std::size_t n, std::mt19937_64& rng) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

inline std::vector<double> random_unit_vector(std::size_t dim, std::mt19937_64& rng) {
  std::vector<double> v(dim);
  double n = 0.0;
  while (n == 0.0) {
    for (double& x : v) x = standard_normal(rng);
    n = norm(v);
  }
  for (double& x : v) x /= n;
  return v;
}

/// Random orthogonal matrix by modified Gram-Schmidt on Gaussian rows.
inline Matrix random_orthogonal(std::size_t dim, std::mt19937_64& rng) {
  Matrix q(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    while (true) {
      for (double& x : q.row(i)) x = standard_normal(rng);
      for (std::size_t k = 0; k < i; ++k) axpy(-dot(q.row(i), q.row(k)), q.row(k), q.row(i));
      const double n = norm(q.row(i));
      if (n > 1e-8) {
        for (double& x : q.row(i)) x /= n;
        break;
      }
    }
  }
  return q;
}

}  // namespace oek
