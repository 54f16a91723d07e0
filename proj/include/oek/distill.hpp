#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oek/embed_core.hpp"
#include "oek/losses.hpp"

namespace oek {

/// Loss weights and logit scale for one language class.
struct ClassParams {
  double lambda_mse = 0.0;
  double lambda_st = 0.0;  // student -> teacher contrastive
  double lambda_ts = 0.0;  // teacher -> student contrastive
  double tau = 1.0;
  double p_unk = 0.0;      // language-drop probability

  void validate(const std::string& what) const {
    require(std::isfinite(lambda_mse) && lambda_mse >= 0.0, ErrorCode::InvalidArgument, what + ": lambda_mse < 0");
    require(std::isfinite(lambda_st) && lambda_st >= 0.0, ErrorCode::InvalidArgument, what + ": lambda_st < 0");
    require(std::isfinite(lambda_ts) && lambda_ts >= 0.0, ErrorCode::InvalidArgument, what + ": lambda_ts < 0");
    require(std::isfinite(tau) && tau > 0.0, ErrorCode::InvalidArgument, what + ": tau must be > 0");
    require(p_unk >= 0.0 && p_unk <= 1.0, ErrorCode::InvalidArgument, what + ": p_unk outside [0, 1]");
  }

  bool operator==(const ClassParams&) const = default;
};

/// Per-class distillation settings; defaults are the published preset.
struct DistillConfig {
  ClassParams foundational{0.5, 1.0, 0.5, 10.0, 0.25};
  ClassParams new_lang{0.1, 1.0, 0.0, 60.0, 0.5};

  const ClassParams& params(LangClass c) const { return c == LangClass::Foundational ? foundational : new_lang; }

  void validate() const {
    foundational.validate("foundational");
    new_lang.validate("new");
  }

  bool operator==(const DistillConfig&) const = default;
};

struct DistillBatch {
  Matrix student_sources;
  Matrix teacher_sources;
  Matrix teacher_targets;
  std::vector<LangTag> tags;

  std::size_t size() const noexcept { return student_sources.rows(); }

  void validate() const {
    const std::size_t n = student_sources.rows();
    require(n >= 1, ErrorCode::EmptyInput, "distill batch is empty");
    require(teacher_sources.rows() == n && teacher_targets.rows() == n && tags.size() == n,
            ErrorCode::LengthMismatch, "distill batch members differ in N");
    check_same_dim(student_sources.cols(), teacher_sources.cols(), "student vs teacher sources");
    check_same_dim(teacher_sources.cols(), teacher_targets.cols(), "teacher sources vs teacher targets");
  }
};

/// Teacher target: midpoint for foundational sources, the source itself for
/// English sources, the target for new languages.
inline std::vector<double> teacher_target(Embedding x_t, Embedding y_t, LangClass lang_class, bool is_english_source) {
  check_same_dim(x_t.size(), y_t.size(), "teacher_target");
  if (lang_class == LangClass::New) return {y_t.begin(), y_t.end()};
  if (is_english_source) return {x_t.begin(), x_t.end()};
  std::vector<double> z(x_t.size());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = 0.5 * (x_t[k] + y_t[k]);
  return z;
}

/// Per-row InfoNCE terms and the gradient w.r.t. the student rows only.
struct DirectionalLoss {
  std::vector<double> per_example;
  Matrix grad_student;  // d(sum_i weight_i * L_i) / d student
};

namespace detail {

/// anchors_are_student selects the direction: true gives student -> teacher
/// (anchor x_i^s, pool z^t), false gives teacher -> student (anchor z_i^t,
/// pool x^s). `weights` scale each row's contribution to the gradient.
inline DirectionalLoss directional_infonce(const Matrix& student, const Matrix& teacher_z,
                                           std::span<const double> tau_per_row, std::span<const double> weights,
                                           bool anchors_are_student) {
  const std::size_t n = student.rows();
  require(teacher_z.rows() == n && tau_per_row.size() == n, ErrorCode::LengthMismatch,
          "contrastive distillation inputs differ in N");
  check_same_dim(student.cols(), teacher_z.cols(), "student vs teacher");
  const auto table = cosine_table(student, teacher_z, "student", "teacher");
  DirectionalLoss out{std::vector<double>(n, 0.0), Matrix(n, student.cols())};
  std::vector<double> logits(n), probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(tau_per_row[i] > 0.0, ErrorCode::InvalidArgument, "tau must be > 0 at row " + std::to_string(i));
    const double tau = tau_per_row[i];
    for (std::size_t k = 0; k < n; ++k) logits[k] = tau * (anchors_are_student ? table.cos(i, k) : table.cos(k, i));
    out.per_example[i] = log_sum_exp(logits) - logits[i];
    const double w = weights[i];
    if (w == 0.0) continue;
    softmax(logits, probs);
    for (std::size_t k = 0; k < n; ++k) {
      const double dl = w * tau * (probs[k] - (k == i ? 1.0 : 0.0));
      if (dl == 0.0) continue;
      // Gradient flows only into the student side of the cosine.
      const std::size_t s = anchors_are_student ? i : k;
      const std::size_t t = anchors_are_student ? k : i;
      add_cosine_grad(dl, student.row(s), teacher_z.row(t), table.cos(s, t), table.norm_a[s], table.norm_b[t],
                      out.grad_student.row(s));
    }
  }
  return out;
}

}  // namespace detail

inline DirectionalLoss forward_contrastive(const Matrix& student, const Matrix& teacher_z,
                                           std::span<const double> tau_per_row) {
  const std::vector<double> ones(student.rows(), 1.0);
  return detail::directional_infonce(student, teacher_z, tau_per_row, ones, true);
}

inline DirectionalLoss backward_contrastive(const Matrix& teacher_z, const Matrix& student,
                                            std::span<const double> tau_per_row) {
  const std::vector<double> ones(student.rows(), 1.0);
  return detail::directional_infonce(student, teacher_z, tau_per_row, ones, false);
}

struct MseResult {
  double value = 0.0;
  std::vector<double> grad;  // d/da
};

/// Squared Euclidean distance (summed, not averaged) and its gradient.
inline MseResult mse(Embedding a, Embedding b) {
  check_same_dim(a.size(), b.size(), "mse");
  MseResult r{0.0, std::vector<double>(a.size())};
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    r.value += d * d;
    r.grad[k] = 2.0 * d;
  }
  return r;
}

/// Teacher targets z for every row of the batch.
inline Matrix teacher_targets(const DistillBatch& batch) {
  Matrix z(batch.size(), batch.teacher_sources.cols());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto zi = teacher_target(batch.teacher_sources.row(i), batch.teacher_targets.row(i),
                                   batch.tags[i].lang_class, batch.tags[i].is_english_source);
    std::copy(zi.begin(), zi.end(), z.row(i).begin());
  }
  return z;
}

/// Per-example weighted sum of forward contrastive, backward contrastive and
/// MSE, averaged over the batch. Only the student receives gradients.
inline LossOutput distill_batch(const DistillBatch& batch, const DistillConfig& cfg) {
  batch.validate();
  cfg.validate();
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix z = teacher_targets(batch);

  std::vector<double> tau(n), w_st(n), w_ts(n), w_mse(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ClassParams& p = cfg.params(batch.tags[i].lang_class);
    tau[i] = p.tau;
    w_st[i] = p.lambda_st * inv_n;
    w_ts[i] = p.lambda_ts * inv_n;
    w_mse[i] = p.lambda_mse * inv_n;
  }
  const Matrix& xs = batch.student_sources;
  const DirectionalLoss fwd = detail::directional_infonce(xs, z, tau, w_st, true);
  const DirectionalLoss bwd = detail::directional_infonce(xs, z, tau, w_ts, false);

  LossOutput out;
  out.per_example.resize(n);
  Matrix g = fwd.grad_student;
  g += bwd.grad_student;
  for (std::size_t i = 0; i < n; ++i) {
    const ClassParams& p = cfg.params(batch.tags[i].lang_class);
    const MseResult m = mse(xs.row(i), z.row(i));
    out.per_example[i] = p.lambda_st * fwd.per_example[i] + p.lambda_ts * bwd.per_example[i] + p.lambda_mse * m.value;
    axpy(w_mse[i], m.grad, g.row(i));
    out.value += out.per_example[i];
  }
  out.value *= inv_n;
  out.grads[grad::student] = std::move(g);
  detail::check_finite_output(out, "distill_batch");
  return out;
}

/// Uniform double in [0, 1) from the top 53 bits of one 64-bit draw.
/// Independent of the standard library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline const std::string kUnspecifiedLanguage = "Unspecified Language";

/// Student-side language prefix: with probability p_unk the language name is
/// replaced by "Unspecified Language". Teacher inputs are never dropped.
inline std::string language_drop(const std::string& language_name, LangClass lang_class, std::mt19937_64& rng,
                                 const DistillConfig& cfg) {
  const double p = cfg.params(lang_class).p_unk;
  const double u = uniform01(rng);
  return (u < p ? kUnspecifiedLanguage : language_name) + ":";
}

}  // namespace oek
