#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oek/embed_core.hpp"

namespace oek {

/// Hyperparameters of the in-batch, hard-negative and translation objectives.
/// Defaults are the published training configuration.
struct LossConfig {
  double tau = 100.0;     // logit scale on cosine similarity
  double margin = 0.3;    // additive margin on the positive logit
  double radius = 0.5;    // false-negative removal radius
  double alpha = 0.05;    // contrastive weight
  double beta = 1.0;      // translation weight
  double gamma = 0.8;     // hard-negative mix in the split-softmax loss
  int hard_negatives = 5; // hard negatives drawn per source sentence

  void validate() const {
    require(std::isfinite(tau) && tau > 0.0, ErrorCode::InvalidArgument, "tau must be > 0");
    require(std::isfinite(margin) && margin >= 0.0, ErrorCode::InvalidArgument, "margin must be >= 0");
    require(std::isfinite(radius) && radius > 0.0, ErrorCode::InvalidArgument, "radius must be > 0");
    require(std::isfinite(alpha) && alpha >= 0.0, ErrorCode::InvalidArgument, "alpha must be >= 0");
    require(std::isfinite(beta) && beta >= 0.0, ErrorCode::InvalidArgument, "beta must be >= 0");
    require(std::isfinite(gamma) && gamma >= 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument,
            "gamma must lie in [0, 1]");
    require(hard_negatives >= 0, ErrorCode::InvalidArgument, "hard_negatives must be >= 0");
  }

  bool operator==(const LossConfig&) const = default;
};

/// Source/target pairs for the contrastive objectives. Row i of `targets` is
/// the only positive of row i of `sources`. Hard negatives of all rows are
/// stacked in one matrix; row i owns [hn_offsets[i], hn_offsets[i+1]).
struct ContrastiveBatch {
  Matrix sources;
  Matrix targets;
  std::optional<Matrix> guide_sources;
  std::optional<Matrix> guide_targets;
  Matrix hard_negatives;
  std::vector<std::size_t> hn_offsets;
  std::vector<std::string> langs;

  std::size_t size() const noexcept { return sources.rows(); }

  std::size_t hard_begin(std::size_t i) const { return hn_offsets.empty() ? 0 : hn_offsets[i]; }
  std::size_t hard_end(std::size_t i) const { return hn_offsets.empty() ? 0 : hn_offsets[i + 1]; }

  /// Replaces the hard negatives with one list per row.
  void set_hard_negatives(const std::vector<std::vector<std::vector<double>>>& per_row) {
    hard_negatives = Matrix(0, sources.cols());
    hn_offsets.assign(1, 0);
    for (const auto& list : per_row) {
      for (const auto& h : list) hard_negatives.append_row(h);
      hn_offsets.push_back(hard_negatives.rows());
    }
  }

  void validate() const {
    require(sources.rows() >= 1, ErrorCode::EmptyInput, "contrastive batch is empty");
    require(targets.rows() == sources.rows(), ErrorCode::LengthMismatch, "sources and targets differ in N");
    check_same_dim(sources.cols(), targets.cols(), "sources vs targets");
    require(guide_sources.has_value() == guide_targets.has_value(), ErrorCode::InvalidArgument,
            "guide_sources and guide_targets must be given together");
    if (guide_sources) {
      require(guide_sources->rows() == sources.rows() && guide_targets->rows() == sources.rows(),
              ErrorCode::LengthMismatch, "guide batches must have N rows");
      check_same_dim(guide_sources->cols(), guide_targets->cols(), "guide sources vs guide targets");
    }
    if (!hn_offsets.empty()) {
      require(hn_offsets.size() == sources.rows() + 1, ErrorCode::LengthMismatch,
              "hard-negative offsets must have N+1 entries");
      require(hn_offsets.front() == 0 && hn_offsets.back() == hard_negatives.rows(), ErrorCode::LengthMismatch,
              "hard-negative offsets do not cover the hard-negative matrix");
      for (std::size_t i = 0; i + 1 < hn_offsets.size(); ++i)
        require(hn_offsets[i] <= hn_offsets[i + 1], ErrorCode::InvalidArgument, "hard-negative offsets decrease");
      if (hard_negatives.rows() > 0) check_same_dim(hard_negatives.cols(), sources.cols(), "hard negatives");
    }
  }
};

namespace grad {
inline const std::string sources = "sources";
inline const std::string targets = "targets";
inline const std::string hard_negatives = "hard_negatives";
inline const std::string logits = "logits";
inline const std::string student = "student";
inline const std::string student_src_tokens = "student_src_tokens";
inline const std::string student_tgt_tokens = "student_tgt_tokens";
}  // namespace grad

/// Loss value plus gradients keyed by the input they belong to.
struct LossOutput {
  double value = 0.0;
  std::vector<double> per_example;
  std::map<std::string, Matrix> grads;

  const Matrix& grad(const std::string& key) const {
    auto it = grads.find(key);
    require(it != grads.end(), ErrorCode::InvalidArgument, "no gradient for '" + key + "'");
    return it->second;
  }
};

inline LossOutput scaled(LossOutput out, double s) {
  out.value *= s;
  for (double& v : out.per_example) v *= s;
  for (auto& [key, g] : out.grads) g *= s;
  return out;
}

/// wa * a + wb * b. Gradients with the same key are summed; per-example
/// values are combined only when both sides have the same length.
inline LossOutput weighted_sum(const LossOutput& a, double wa, const LossOutput& b, double wb) {
  LossOutput out;
  out.value = wa * a.value + wb * b.value;
  if (a.per_example.size() == b.per_example.size()) {
    out.per_example.resize(a.per_example.size());
    for (std::size_t i = 0; i < a.per_example.size(); ++i)
      out.per_example[i] = wa * a.per_example[i] + wb * b.per_example[i];
  }
  for (const auto& [key, g] : a.grads) {
    Matrix m = g;
    m *= wa;
    out.grads[key] = std::move(m);
  }
  for (const auto& [key, g] : b.grads) {
    Matrix m = g;
    m *= wb;
    auto it = out.grads.find(key);
    if (it == out.grads.end())
      out.grads[key] = std::move(m);
    else
      it->second += m;
  }
  return out;
}

/// Indices j (excluding `exclude`) with guide_sims_row[j] < r * positive_sim.
/// Ties are dropped.
inline std::vector<std::size_t> filter_negatives(std::span<const double> guide_sims_row, double positive_sim,
                                                 double r, std::optional<std::size_t> exclude = std::nullopt) {
  require(r > 0.0, ErrorCode::InvalidArgument, "radius must be > 0");
  std::vector<std::size_t> kept;
  const double bound = r * positive_sim;
  for (std::size_t j = 0; j < guide_sims_row.size(); ++j) {
    if (exclude && *exclude == j) continue;
    if (guide_sims_row[j] < bound) kept.push_back(j);
  }
  return kept;
}

namespace detail {

inline void check_finite_output(const LossOutput& out, const std::string& what) {
  require(std::isfinite(out.value), ErrorCode::NonFinite, what + " produced a non-finite value");
  for (const auto& [key, g] : out.grads)
    require(g.all_finite(), ErrorCode::NonFinite, what + " produced a non-finite gradient for " + key);
}

/// Cached cosine pieces for one pair of matrices.
struct CosineTable {
  std::vector<double> norm_a, norm_b;
  Matrix cos;
};

inline CosineTable cosine_table(const Matrix& a, const Matrix& b, const std::string& name_a,
                                const std::string& name_b) {
  check_same_dim(a.cols(), b.cols(), name_a + " vs " + name_b);
  CosineTable t{row_norms(a, name_a), row_norms(b, name_b), Matrix(a.rows(), b.rows())};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) t.cos(i, j) = dot(a.row(i), b.row(j)) / (t.norm_a[i] * t.norm_b[j]);
  return t;
}

/// Back-propagates dL/dlogit through logit = tau * cos(a_i, b_j).
inline void backprop_cosine_logit(double dl, double tau, const Matrix& a, std::size_t i, const Matrix& b,
                                  std::size_t j, const CosineTable& t, Matrix& ga, Matrix& gb) {
  if (dl == 0.0) return;
  add_cosine_grad(dl * tau, a.row(i), b.row(j), t.cos(i, j), t.norm_a[i], t.norm_b[j], ga.row(i));
  add_cosine_grad(dl * tau, b.row(j), a.row(i), t.cos(i, j), t.norm_b[j], t.norm_a[i], gb.row(j));
}

}  // namespace detail

/// Margin InfoNCE over in-batch negatives, with guide-based false-negative
/// filtering. Rows whose filtered negative set is empty contribute 0.
inline LossOutput infonce_margin(const ContrastiveBatch& batch, const LossConfig& cfg) {
  batch.validate();
  cfg.validate();
  const std::size_t n = batch.size();
  const Matrix& x = batch.sources;
  const Matrix& y = batch.targets;
  const auto model = detail::cosine_table(x, y, "sources", "targets");
  const auto guide = batch.guide_sources
                         ? detail::cosine_table(*batch.guide_sources, *batch.guide_targets, "guide_sources",
                                                "guide_targets")
                         : model;

  LossOutput out;
  out.per_example.assign(n, 0.0);
  Matrix gx(n, x.cols()), gy(n, y.cols());
  std::vector<double> guide_row(n), logits, probs;
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) guide_row[j] = cfg.tau * guide.cos(i, j);
    const auto kept = filter_negatives(guide_row, guide_row[i], cfg.radius, i);
    logits.assign(1, cfg.tau * model.cos(i, i) - cfg.margin);
    for (std::size_t j : kept) logits.push_back(cfg.tau * model.cos(i, j));
    probs.resize(logits.size());
    const double lse = log_sum_exp(logits);
    out.per_example[i] = lse - logits[0];
    if (kept.empty()) continue;
    softmax(logits, probs);
    detail::backprop_cosine_logit((probs[0] - 1.0) * inv_n, cfg.tau, x, i, y, i, model, gx, gy);
    for (std::size_t k = 0; k < kept.size(); ++k)
      detail::backprop_cosine_logit(probs[k + 1] * inv_n, cfg.tau, x, i, y, kept[k], model, gx, gy);
  }
  double total = 0.0;
  for (double v : out.per_example) total += v;
  out.value = total * inv_n;
  out.grads[grad::sources] = std::move(gx);
  out.grads[grad::targets] = std::move(gy);
  detail::check_finite_output(out, "infonce_margin");
  return out;
}

/// Hard-negative term of the split-softmax loss: no margin, separate
/// denominator per row. Rows without hard negatives contribute 0.
inline LossOutput hard_negative_term(const ContrastiveBatch& batch, double tau) {
  batch.validate();
  const std::size_t n = batch.size();
  const Matrix& x = batch.sources;
  const Matrix& y = batch.targets;
  const Matrix& h = batch.hard_negatives;
  const auto xnorm = row_norms(x, "sources");
  const auto ynorm = row_norms(y, "targets");
  const auto hnorm = h.rows() > 0 ? row_norms(h, "hard_negatives") : std::vector<double>{};

  LossOutput out;
  out.per_example.assign(n, 0.0);
  Matrix gx(n, x.cols()), gy(n, y.cols()), gh(h.rows(), x.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> logits, probs, cosines;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = batch.hard_begin(i), e = batch.hard_end(i);
    if (b == e) continue;
    cosines.assign(1, dot(x.row(i), y.row(i)) / (xnorm[i] * ynorm[i]));
    for (std::size_t k = b; k < e; ++k) cosines.push_back(dot(x.row(i), h.row(k)) / (xnorm[i] * hnorm[k]));
    logits.resize(cosines.size());
    probs.resize(cosines.size());
    for (std::size_t k = 0; k < cosines.size(); ++k) logits[k] = tau * cosines[k];
    out.per_example[i] = log_sum_exp(logits) - logits[0];
    softmax(logits, probs);
    const double d0 = (probs[0] - 1.0) * inv_n * tau;
    add_cosine_grad(d0, x.row(i), y.row(i), cosines[0], xnorm[i], ynorm[i], gx.row(i));
    add_cosine_grad(d0, y.row(i), x.row(i), cosines[0], ynorm[i], xnorm[i], gy.row(i));
    for (std::size_t k = b; k < e; ++k) {
      const double c = cosines[k - b + 1];
      const double dk = probs[k - b + 1] * inv_n * tau;
      add_cosine_grad(dk, x.row(i), h.row(k), c, xnorm[i], hnorm[k], gx.row(i));
      add_cosine_grad(dk, h.row(k), x.row(i), c, hnorm[k], xnorm[i], gh.row(k));
    }
  }
  double total = 0.0;
  for (double v : out.per_example) total += v;
  out.value = total * inv_n;
  out.grads[grad::sources] = std::move(gx);
  out.grads[grad::targets] = std::move(gy);
  out.grads[grad::hard_negatives] = std::move(gh);
  detail::check_finite_output(out, "hard_negative_term");
  return out;
}

/// (1 - gamma) * infonce_margin + gamma * hard_negative_term.
inline LossOutput split_softmax(const ContrastiveBatch& batch, const LossConfig& cfg) {
  const LossOutput in_batch = infonce_margin(batch, cfg);
  const LossOutput hard = hard_negative_term(batch, cfg.tau);
  return weighted_sum(in_batch, 1.0 - cfg.gamma, hard, cfg.gamma);
}

/// Summed token negative log-likelihood; gradient w.r.t. logits is
/// softmax minus one-hot, per position.
inline LossOutput decoding_nll(const Matrix& logits, std::span<const std::size_t> target_ids) {
  require(logits.rows() >= 1, ErrorCode::EmptyInput, "decoding_nll needs at least one position");
  require(target_ids.size() == logits.rows(), ErrorCode::LengthMismatch,
          "decoding_nll: " + std::to_string(target_ids.size()) + " targets for " + std::to_string(logits.rows()) +
              " positions");
  LossOutput out;
  out.per_example.resize(logits.rows());
  Matrix g(logits.rows(), logits.cols());
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    require(target_ids[t] < logits.cols(), ErrorCode::IndexOutOfRange,
            "target id " + std::to_string(target_ids[t]) + " at position " + std::to_string(t) +
                " is outside vocabulary of " + std::to_string(logits.cols()));
    const double lse = log_sum_exp(logits.row(t));
    out.per_example[t] = lse - logits(t, target_ids[t]);
    out.value += out.per_example[t];
    softmax(logits.row(t), g.row(t));
    g(t, target_ids[t]) -= 1.0;
  }
  out.grads[grad::logits] = std::move(g);
  detail::check_finite_output(out, "decoding_nll");
  return out;
}

/// alpha * contrastive + beta * translation.
inline LossOutput combined_loss(const LossOutput& contrastive, const LossOutput& translation, const LossConfig& cfg) {
  require(std::isfinite(contrastive.value) && std::isfinite(translation.value), ErrorCode::NonFinite,
          "combined_loss inputs must be finite");
  return weighted_sum(contrastive, cfg.alpha, translation, cfg.beta);
}

}  // namespace oek
