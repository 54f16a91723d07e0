#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oek/align.hpp"
#include "oek/distill.hpp"
#include "oek/gradcheck.hpp"
#include "oek/losses.hpp"
#include "oek/random.hpp"

namespace oek {

// Random-instance gradient certification for every differentiable loss.
// Each instance packs the differentiable inputs into one flat vector, checks
// the analytic gradient against central differences, and reports.

struct GradSuiteOptions {
  std::size_t max_rows = 8;
  std::size_t max_dim = 16;
  double max_tau = 20.0;        // contrastive logit scale
  double max_token_tau = 50.0;  // token objective softmax temperature
  double rtol = 1e-5;
  double atol = 1e-8;
  StepRule step{};
};

struct InstanceResult {
  std::string loss;
  std::size_t instance = 0;
  std::size_t rows = 0;
  std::size_t dim = 0;
  double tau = 0.0;
  GradReport report;
};

namespace detail {

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  Matrix m(r, c);
  for (double& v : m.flat()) v = standard_normal(rng);
  return m;
}

// Random directions with norms in [0.5, 2]. A near-zero row makes the cosine
// curvature explode and the central difference loses its O(h^2) accuracy.
inline Matrix random_embeddings(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    const std::vector<double> u = random_unit_vector(c, rng);
    const double len = 0.5 + 1.5 * uniform01(rng);
    for (std::size_t k = 0; k < c; ++k) m(i, k) = len * u[k];
  }
  return m;
}

inline std::size_t uniform_between(std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
  return lo + uniform_index(hi - lo + 1, rng);
}

/// Copies consecutive blocks of x into the given matrices.
inline void unpack(std::span<const double> x, std::initializer_list<Matrix*> parts) {
  std::size_t at = 0;
  for (Matrix* m : parts) {
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(at), x.begin() + static_cast<std::ptrdiff_t>(at + m->size()),
              m->flat().begin());
    at += m->size();
  }
}

inline std::vector<double> pack(std::initializer_list<const Matrix*> parts) {
  std::vector<double> out;
  for (const Matrix* m : parts) out.insert(out.end(), m->flat().begin(), m->flat().end());
  return out;
}

inline GradReport run_check(const ScalarFn& f, const std::vector<double>& x, const std::vector<double>& analytic,
                            const GradSuiteOptions& o) {
  return check(analytic, finite_diff_grad(f, x, o.step), o.rtol, o.atol);
}

inline ContrastiveBatch random_contrastive(std::size_t n, std::size_t d, bool hard, std::mt19937_64& rng) {
  ContrastiveBatch b;
  b.sources = random_embeddings(n, d, rng);
  b.targets = random_embeddings(n, d, rng);
  // Guides are fixed inputs, so the negative filter cannot flip under the
  // finite-difference perturbation.
  b.guide_sources = random_embeddings(n, d, rng);
  b.guide_targets = random_embeddings(n, d, rng);
  if (hard) {
    std::vector<std::vector<std::vector<double>>> per_row(n);
    for (auto& list : per_row) {
      const std::size_t k = uniform_between(0, 3, rng);
      for (std::size_t h = 0; h < k; ++h) {
        std::vector<double> v = random_unit_vector(d, rng);
        const double len = 0.5 + 1.5 * uniform01(rng);
        for (double& e : v) e *= len;
        list.push_back(std::move(v));
      }
    }
    b.set_hard_negatives(per_row);
  }
  return b;
}

inline LossConfig random_loss_config(double tau, std::mt19937_64& rng) {
  LossConfig c;
  c.tau = tau;
  c.margin = 0.5 * uniform01(rng);
  c.radius = 0.3 + 0.6 * uniform01(rng);
  c.gamma = uniform01(rng);
  return c;
}

}  // namespace detail

inline InstanceResult certify_infonce(std::mt19937_64& rng, const GradSuiteOptions& o) {
  const std::size_t n = detail::uniform_between(2, o.max_rows, rng), d = detail::uniform_between(2, o.max_dim, rng);
  const double tau = 1.0 + (o.max_tau - 1.0) * uniform01(rng);
  ContrastiveBatch b = detail::random_contrastive(n, d, false, rng);
  const LossConfig cfg = detail::random_loss_config(tau, rng);
  const LossOutput out = infonce_margin(b, cfg);
  const auto analytic = detail::pack({&out.grad(grad::sources), &out.grad(grad::targets)});
  ScalarFn f = [&](std::span<const double> x) {
    ContrastiveBatch p = b;
    detail::unpack(x, {&p.sources, &p.targets});
    return infonce_margin(p, cfg).value;
  };
  return {"infonce_margin", 0, n, d, tau, detail::run_check(f, detail::pack({&b.sources, &b.targets}), analytic, o)};
}

inline InstanceResult certify_split_softmax(std::mt19937_64& rng, const GradSuiteOptions& o) {
  const std::size_t n = detail::uniform_between(2, o.max_rows, rng), d = detail::uniform_between(2, o.max_dim, rng);
  const double tau = 1.0 + (o.max_tau - 1.0) * uniform01(rng);
  ContrastiveBatch b = detail::random_contrastive(n, d, true, rng);
  const LossConfig cfg = detail::random_loss_config(tau, rng);
  const LossOutput out = split_softmax(b, cfg);
  const auto analytic =
      detail::pack({&out.grad(grad::sources), &out.grad(grad::targets), &out.grad(grad::hard_negatives)});
  ScalarFn f = [&](std::span<const double> x) {
    ContrastiveBatch p = b;
    detail::unpack(x, {&p.sources, &p.targets, &p.hard_negatives});
    return split_softmax(p, cfg).value;
  };
  return {"split_softmax", 0, n, d, tau,
          detail::run_check(f, detail::pack({&b.sources, &b.targets, &b.hard_negatives}), analytic, o)};
}

inline InstanceResult certify_decoding_nll(std::mt19937_64& rng, const GradSuiteOptions& o) {
  const std::size_t t = detail::uniform_between(1, o.max_rows, rng), v = detail::uniform_between(2, o.max_dim, rng);
  const double scale = 1.0 + 4.0 * uniform01(rng);
  Matrix logits = detail::random_matrix(t, v, rng);
  logits *= scale;
  std::vector<std::size_t> targets(t);
  for (auto& id : targets) id = uniform_index(v, rng);
  const LossOutput out = decoding_nll(logits, targets);
  ScalarFn f = [&](std::span<const double> x) {
    Matrix p(t, v, std::vector<double>(x.begin(), x.end()));
    return decoding_nll(p, targets).value;
  };
  return {"decoding_nll", 0, t, v, scale, detail::run_check(f, detail::pack({&logits}), detail::pack({&out.grad(grad::logits)}), o)};
}

inline InstanceResult certify_distill(std::mt19937_64& rng, const GradSuiteOptions& o) {
  const std::size_t n = detail::uniform_between(2, o.max_rows, rng), d = detail::uniform_between(2, o.max_dim, rng);
  DistillBatch b{detail::random_embeddings(n, d, rng), detail::random_embeddings(n, d, rng), detail::random_embeddings(n, d, rng), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_new = uniform01(rng) < 0.5;
    b.tags.push_back({"l" + std::to_string(i), is_new ? LangClass::New : LangClass::Foundational,
                      !is_new && uniform01(rng) < 0.3});
  }
  const DistillConfig cfg;  // published preset
  const LossOutput out = distill_batch(b, cfg);
  ScalarFn f = [&](std::span<const double> x) {
    DistillBatch p = b;
    detail::unpack(x, {&p.student_sources});
    return distill_batch(p, cfg).value;
  };
  return {"distill_batch", 0, n, d, cfg.new_lang.tau,
          detail::run_check(f, detail::pack({&b.student_sources}), detail::pack({&out.grad(grad::student)}), o)};
}

inline InstanceResult certify_token_objective(std::mt19937_64& rng, const GradSuiteOptions& o,
                                              SoConvention convention = SoConvention::NegLog) {
  const std::size_t ls = detail::uniform_between(1, o.max_rows, rng), lt = detail::uniform_between(1, o.max_rows, rng);
  const std::size_t d = detail::uniform_between(2, o.max_dim, rng);
  TokenObjectiveConfig cfg;
  cfg.temperature = 1.0 + (o.max_token_tau - 1.0) * uniform01(rng);
  cfg.lambda = 0.5 + uniform01(rng);
  Matrix ss = detail::random_embeddings(ls, d, rng), st = detail::random_embeddings(lt, d, rng);
  const Matrix ts = detail::random_embeddings(ls, d, rng), tt = detail::random_embeddings(lt, d, rng);
  const LossOutput out = token_objective(ss, st, ts, tt, cfg, convention);
  ScalarFn f = [&](std::span<const double> x) {
    Matrix a = ss, b = st;
    detail::unpack(x, {&a, &b});
    return token_objective(a, b, ts, tt, cfg, convention).value;
  };
  return {"token_objective", 0, std::max(ls, lt), d, cfg.temperature,
          detail::run_check(f, detail::pack({&ss, &st}),
                            detail::pack({&out.grad(grad::student_src_tokens), &out.grad(grad::student_tgt_tokens)}), o)};
}

/// `instances` checks of every loss from one seed.
inline std::vector<InstanceResult> certify_all(std::size_t instances, std::uint64_t seed,
                                               const GradSuiteOptions& o = {}) {
  using Fn = std::function<InstanceResult(std::mt19937_64&, const GradSuiteOptions&)>;
  const std::vector<Fn> suite = {
      certify_infonce, certify_split_softmax, certify_decoding_nll, certify_distill,
      [](std::mt19937_64& r, const GradSuiteOptions& opt) { return certify_token_objective(r, opt); }};
  std::vector<InstanceResult> out;
  for (std::size_t s = 0; s < suite.size(); ++s) {
    std::mt19937_64 rng(seed + 1000 * s);
    for (std::size_t i = 0; i < instances; ++i) {
      InstanceResult r = suite[s](rng, o);
      r.instance = i;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace oek
