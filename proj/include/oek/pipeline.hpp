#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oek/datakit.hpp"
#include "oek/distill.hpp"
#include "oek/losses.hpp"
#include "oek/retrieval.hpp"

namespace oek {

/// Per-language linear maps plus a shared bias. The "unk" map stands in for
/// the language-agnostic input used by language drop.
struct ToyEncoder {
  std::vector<std::string> languages;
  std::vector<Matrix> maps;  // one d x d map per language
  std::vector<double> bias;
  Matrix unk;                // empty until distillation adds it

  std::size_t dim() const { return bias.size(); }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < languages.size(); ++i)
      if (languages[i] == name) return i;
    return std::nullopt;
  }

  std::size_t index(const std::string& name) const {
    auto i = find(name);
    require(i.has_value(), ErrorCode::UnknownLanguage, "encoder has no map for language '" + name + "'");
    return *i;
  }

  void add_language(const std::string& name) {
    require(!find(name), ErrorCode::InvalidArgument, "language '" + name + "' already present");
    languages.push_back(name);
    maps.push_back(Matrix::identity(dim()));
  }

  /// map * x + bias, with the map chosen by language (or unk when requested).
  void encode(const Matrix& map, std::span<const double> x, std::span<double> out) const {
    for (std::size_t r = 0; r < dim(); ++r) out[r] = dot(map.row(r), x) + bias[r];
  }

  Matrix encode_rows(const std::string& lang, const Matrix& raw, std::span<const std::size_t> rows) const {
    const Matrix& m = maps[index(lang)];
    Matrix out(rows.size(), dim());
    for (std::size_t i = 0; i < rows.size(); ++i) encode(m, raw.row(rows[i]), out.row(i));
    return out;
  }

  bool all_finite() const {
    for (const auto& m : maps)
      if (!m.all_finite()) return false;
    for (double b : bias)
      if (!std::isfinite(b)) return false;
    return unk.all_finite();
  }

  bool operator==(const ToyEncoder&) const = default;
};

/// Logits = weights * embedding + bias over V concept ids, one position.
struct ToyDecoder {
  Matrix weights;  // V x d
  std::vector<double> bias;

  std::vector<double> logits(std::span<const double> e) const {
    std::vector<double> out(weights.rows());
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = dot(weights.row(v), e) + bias[v];
    return out;
  }

  bool operator==(const ToyDecoder&) const = default;
};

struct ToyModel {
  ToyEncoder encoder;
  ToyDecoder decoder;
  std::uint64_t step = 0;  // global step, carried across stages

  bool operator==(const ToyModel&) const = default;
};

// Losses are batch means scaled by alpha, so the contrastive stages need a
// large step to move at all; the distillation stage is stiffer.
struct TrainOptions {
  double lr = 10.0;
  std::size_t steps = 200;
  std::uint64_t seed = 17;
  unsigned threads = 1;  // evaluation only; training is single-threaded
};

struct EvalMetrics {
  double xsim_foundational = 0.0;    // mean over non-English foundational languages, %
  double xsimpp_foundational = 0.0;
  std::optional<double> xsim_new;    // absent when the encoder has no new languages
  std::optional<double> xsimpp_new;
  double decode_error_foundational = 0.0;  // % of training concepts mis-decoded
  double decode_nll_foundational = 0.0;    // mean NLL of the same

  bool operator==(const EvalMetrics&) const = default;
};

struct StageReport {
  std::string stage;
  std::vector<double> loss_trace;
  EvalMetrics before;
  EvalMetrics after;
  double preservation_delta = 0.0;         // foundational xsim after - before, points
  double decode_preservation_delta = 0.0;  // foundational decode error after - before, points
  double decode_nll_delta = 0.0;           // foundational decode NLL after - before
  std::optional<double> teacher_drift;     // stage 4: mean squared distance to the teacher, foundational rows

  bool operator==(const StageReport&) const = default;
};

namespace detail {

inline void require_finite_loss(double v, std::uint64_t step, const std::string& stage) {
  require(std::isfinite(v), ErrorCode::DivergedLoss, stage + " loss is not finite at step " + std::to_string(step));
}

// A run can blow up for many steps while every value stays finite, so a
// loss far above where the stage started also counts as divergence.
constexpr double kBlowupFactor = 1e3;

inline void require_bounded_trace(const std::vector<double>& trace, std::uint64_t step, const std::string& stage) {
  const double limit = kBlowupFactor * std::max(1.0, trace.front());
  require(trace.back() <= limit, ErrorCode::DivergedLoss,
          stage + " loss grew past " + std::to_string(limit) + " at step " + std::to_string(step) + "; lower the lr");
}

/// Runs one training step, reporting numeric blow-ups as DivergedLoss.
template <class Fn>
auto guarded_step(std::uint64_t step, const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonFinite || e.code() == ErrorCode::ZeroNorm)
      fail(ErrorCode::DivergedLoss, stage + " diverged at step " + std::to_string(step) + ": " + e.what());
    throw;
  }
}

/// Accumulates gradients of the encoder parameters.
struct EncoderGrad {
  std::vector<Matrix> maps;
  std::vector<double> bias;
  Matrix unk;

  explicit EncoderGrad(const ToyEncoder& e) : bias(e.dim(), 0.0) {
    for (const auto& m : e.maps) maps.emplace_back(m.rows(), m.cols());
    if (!e.unk.empty()) unk = Matrix(e.unk.rows(), e.unk.cols());
  }

  /// d(out)/d(params) for out = map * x + bias.
  void add(Matrix& map_grad, std::span<const double> x, std::span<const double> g) {
    for (std::size_t r = 0; r < g.size(); ++r) {
      if (g[r] == 0.0) continue;
      axpy(g[r], x, map_grad.row(r));
      bias[r] += g[r];
    }
  }

  void apply(ToyEncoder& e, double lr) const {
    for (std::size_t l = 0; l < maps.size(); ++l) axpy(-lr, maps[l].flat(), e.maps[l].flat());
    axpy(-lr, bias, e.bias);
    if (!unk.empty()) axpy(-lr, unk.flat(), e.unk.flat());
  }
};

struct PairRows {
  std::vector<std::size_t> cid, src_lang, tgt_lang;
};

/// One direction per training concept. Assignments cycle with period 10, so
/// every window of 10 steps sees the same set of sub-batches.
inline PairRows assign_directions(const SynthCorpus& c, const std::vector<Direction>& dirs, std::uint64_t step) {
  require(!dirs.empty(), ErrorCode::InvalidArgument, "no training directions");
  constexpr std::size_t kCycle = 10;
  const std::size_t stride = std::max<std::size_t>(1, dirs.size() / kCycle);
  PairRows rows;
  for (std::size_t i = 0; i < c.train_concepts.size(); ++i) {
    const Direction& d = dirs[(i + (step % kCycle) * stride) % dirs.size()];
    rows.cid.push_back(c.train_concepts[i]);
    rows.src_lang.push_back(d.src_lang);
    rows.tgt_lang.push_back(d.tgt_lang);
  }
  return rows;
}

inline std::vector<Direction> foundational_directions(const SynthCorpus& c) {
  std::vector<Direction> out;
  for (const Direction& d : c.directions)
    if (c.languages[d.src_lang].lang_class == LangClass::Foundational) out.push_back(d);
  return out;
}

inline std::vector<std::size_t> non_english_foundational(const SynthCorpus& c) {
  std::vector<std::size_t> out;
  for (std::size_t l : c.languages_of(LangClass::Foundational))
    if (!c.languages[l].is_english) out.push_back(l);
  return out;
}

/// Mean xsim and xsim++ of the given languages against English, held-out concepts.
inline std::pair<double, double> retrieval_errors(const ToyEncoder& enc, const SynthCorpus& c,
                                                  const std::vector<std::size_t>& langs, unsigned threads) {
  if (langs.empty() || c.heldout_concepts.empty()) return {0.0, 0.0};
  const auto& held = c.heldout_concepts;
  const std::string& eng = c.languages[c.english()].name;
  CandidatePool pool{enc.encode_rows(eng, c.sentences[c.english()], held), std::nullopt};
  const Matrix hn_raw = gather_hard_negatives(c, c.english(), held);
  std::vector<std::size_t> all(hn_raw.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  CandidatePool pool_pp{pool.targets, enc.encode_rows(eng, hn_raw, all)};
  double xs = 0.0, xp = 0.0;
  for (std::size_t l : langs) {
    const Matrix q = enc.encode_rows(c.languages[l].name, c.sentences[l], held);
    xs += xsim(q, pool, threads).error_rate_percent;
    xp += xsimpp(q, pool_pp, threads).error_rate_percent;
  }
  return {xs / static_cast<double>(langs.size()), xp / static_cast<double>(langs.size())};
}

/// Decoder accuracy and NLL on training concepts of all foundational languages.
inline std::pair<double, double> decode_metrics(const ToyEncoder& enc, const ToyDecoder& dec, const SynthCorpus& c) {
  std::size_t wrong = 0, total = 0;
  double nll = 0.0;
  std::vector<double> e(enc.dim());
  for (std::size_t l : c.languages_of(LangClass::Foundational)) {
    const Matrix& m = enc.maps[enc.index(c.languages[l].name)];
    for (std::size_t cid : c.train_concepts) {
      enc.encode(m, c.sentences[l].row(cid), e);
      const auto z = dec.logits(e);
      std::size_t best = 0;
      for (std::size_t v = 1; v < z.size(); ++v)
        if (z[v] > z[best]) best = v;
      wrong += best != cid;
      nll += log_sum_exp(z) - z[cid];
      ++total;
    }
  }
  if (total == 0) return {0.0, 0.0};
  return {100.0 * static_cast<double>(wrong) / static_cast<double>(total), nll / static_cast<double>(total)};
}

}  // namespace detail

inline EvalMetrics evaluate(const ToyModel& m, const SynthCorpus& c, unsigned threads = 1) {
  EvalMetrics r;
  std::tie(r.xsim_foundational, r.xsimpp_foundational) =
      detail::retrieval_errors(m.encoder, c, detail::non_english_foundational(c), threads);
  std::vector<std::size_t> new_langs;
  for (std::size_t l : c.languages_of(LangClass::New))
    if (m.encoder.find(c.languages[l].name)) new_langs.push_back(l);
  if (!new_langs.empty()) {
    auto [xs, xp] = detail::retrieval_errors(m.encoder, c, new_langs, threads);
    r.xsim_new = xs;
    r.xsimpp_new = xp;
  }
  std::tie(r.decode_error_foundational, r.decode_nll_foundational) = detail::decode_metrics(m.encoder, m.decoder, c);
  return r;
}

/// Identity maps for the foundational languages, zero bias and decoder.
inline ToyModel init_model(const SynthCorpus& c) {
  ToyModel m;
  m.encoder.bias.assign(c.cfg.dim, 0.0);
  for (std::size_t l : c.languages_of(LangClass::Foundational)) m.encoder.add_language(c.languages[l].name);
  m.decoder.weights = Matrix(c.cfg.n_concepts, c.cfg.dim);
  m.decoder.bias.assign(c.cfg.n_concepts, 0.0);
  return m;
}

namespace detail {

/// One gradient step of alpha * contrastive + beta * translation NLL. With
/// hard negatives the contrastive term is the split-softmax loss.
inline double contrastive_step(ToyModel& m, const SynthCorpus& c, const LossConfig& cfg, double lr,
                               bool with_hard_negatives) {
  const ToyEncoder& enc = m.encoder;
  const std::size_t d = enc.dim();
  const PairRows rows = assign_directions(c, foundational_directions(c), m.step);
  const std::size_t n = rows.cid.size();
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(cfg.hard_negatives), c.k());

  std::vector<const Matrix*> src_map(n), tgt_map(n);
  ContrastiveBatch batch;
  batch.sources = Matrix(n, d);
  batch.targets = Matrix(n, d);
  batch.guide_sources = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    src_map[i] = &enc.maps[enc.index(c.languages[rows.src_lang[i]].name)];
    tgt_map[i] = &enc.maps[enc.index(c.languages[rows.tgt_lang[i]].name)];
    enc.encode(*src_map[i], c.sentences[rows.src_lang[i]].row(rows.cid[i]), batch.sources.row(i));
    enc.encode(*tgt_map[i], c.sentences[rows.tgt_lang[i]].row(rows.cid[i]), batch.targets.row(i));
    const auto g = c.concepts.row(rows.cid[i]);
    std::copy(g.begin(), g.end(), batch.guide_sources->row(i).begin());
    batch.langs.push_back(c.languages[rows.src_lang[i]].name);
  }
  batch.guide_targets = batch.guide_sources;
  if (with_hard_negatives && k > 0) {
    batch.hard_negatives = Matrix(n * k, d);
    batch.hn_offsets.assign(1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t h = 0; h < k; ++h)
        enc.encode(*tgt_map[i], c.hard_negatives[rows.tgt_lang[i]].row(rows.cid[i] * c.k() + h),
                   batch.hard_negatives.row(i * k + h));
      batch.hn_offsets.push_back((i + 1) * k);
    }
  }

  const LossOutput contrast = with_hard_negatives ? split_softmax(batch, cfg) : infonce_margin(batch, cfg);

  EncoderGrad eg(enc);
  Matrix gd(m.decoder.weights.rows(), d);
  std::vector<double> gdb(m.decoder.bias.size(), 0.0);
  Matrix gx = contrast.grad(grad::sources);
  gx *= cfg.alpha;
  Matrix gy = contrast.grad(grad::targets);
  gy *= cfg.alpha;

  double nll = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix logits(1, m.decoder.weights.rows(), m.decoder.logits(batch.sources.row(i)));
    const std::size_t target = rows.cid[i];
    const LossOutput dec = decoding_nll(logits, std::span<const std::size_t>(&target, 1));
    nll += dec.value * inv_n;
    const Matrix& dl = dec.grad(grad::logits);
    for (std::size_t v = 0; v < dl.cols(); ++v) {
      const double g = cfg.beta * inv_n * dl(0, v);
      if (g == 0.0) continue;
      axpy(g, batch.sources.row(i), gd.row(v));
      gdb[v] += g;
      axpy(g, m.decoder.weights.row(v), gx.row(i));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    eg.add(eg.maps[enc.index(c.languages[rows.src_lang[i]].name)], c.sentences[rows.src_lang[i]].row(rows.cid[i]),
           gx.row(i));
    eg.add(eg.maps[enc.index(c.languages[rows.tgt_lang[i]].name)], c.sentences[rows.tgt_lang[i]].row(rows.cid[i]),
           gy.row(i));
  }
  if (with_hard_negatives && k > 0) {
    const Matrix& gh = contrast.grad(grad::hard_negatives);
    for (std::size_t i = 0; i < n; ++i) {
      Matrix& mg = eg.maps[enc.index(c.languages[rows.tgt_lang[i]].name)];
      for (std::size_t h = 0; h < k; ++h) {
        auto hrow = gh.row(i * k + h);
        std::vector<double> scaled(hrow.begin(), hrow.end());
        for (double& v : scaled) v *= cfg.alpha;
        eg.add(mg, c.hard_negatives[rows.tgt_lang[i]].row(rows.cid[i] * c.k() + h), scaled);
      }
    }
  }

  const double loss = cfg.alpha * contrast.value + cfg.beta * nll;
  require_finite_loss(loss, m.step, with_hard_negatives ? "stage3" : "stage2");
  eg.apply(m.encoder, lr);
  axpy(-lr, gd.flat(), m.decoder.weights.flat());
  axpy(-lr, gdb, m.decoder.bias);
  require(m.encoder.all_finite() && m.decoder.weights.all_finite(), ErrorCode::DivergedLoss,
          "weights became non-finite at step " + std::to_string(m.step));
  ++m.step;
  return loss;
}

inline StageReport run_contrastive_stage(ToyModel& m, const SynthCorpus& c, const LossConfig& cfg,
                                         const TrainOptions& opt, bool hard, const std::string& name) {
  cfg.validate();
  require(opt.steps >= 1, ErrorCode::InvalidArgument, "steps must be >= 1");
  require(std::isfinite(opt.lr) && opt.lr > 0.0, ErrorCode::InvalidArgument, "lr must be > 0");
  StageReport r;
  r.stage = name;
  r.before = evaluate(m, c, opt.threads);
  for (std::size_t s = 0; s < opt.steps; ++s) {
    const std::uint64_t step = m.step;
    r.loss_trace.push_back(guarded_step(step, name, [&] { return contrastive_step(m, c, cfg, opt.lr, hard); }));
    require_bounded_trace(r.loss_trace, step, name);
  }
  r.after = evaluate(m, c, opt.threads);
  r.preservation_delta = r.after.xsim_foundational - r.before.xsim_foundational;
  r.decode_preservation_delta = r.after.decode_error_foundational - r.before.decode_error_foundational;
  r.decode_nll_delta = r.after.decode_nll_foundational - r.before.decode_nll_foundational;
  return r;
}

}  // namespace detail

struct StageResult {
  ToyModel model;
  StageReport report;
};

/// Contrastive plus translation finetuning from a fresh model. Pass a model to
/// continue training it instead.
inline StageResult train_stage2(const SynthCorpus& c, const LossConfig& cfg, const TrainOptions& opt,
                                std::optional<ToyModel> start = std::nullopt) {
  ToyModel m = start ? std::move(*start) : init_model(c);
  auto r = detail::run_contrastive_stage(m, c, cfg, opt, false, "stage2");
  return {std::move(m), std::move(r)};
}

/// Split-softmax finetuning with hard negatives, continuing the given model.
inline StageResult train_stage3(ToyModel model, const SynthCorpus& c, const LossConfig& cfg, const TrainOptions& opt) {
  require(c.k() >= 1, ErrorCode::InvalidArgument, "corpus has no hard negatives");
  auto r = detail::run_contrastive_stage(model, c, cfg, opt, true, "stage3");
  return {std::move(model), std::move(r)};
}

/// Student-teacher distillation onto all corpus languages. The teacher is
/// read-only; the student starts as a copy and gains identity maps for the
/// new languages plus an identity unk map for language drop.
inline StageResult distill_stage4(const ToyModel& teacher, const SynthCorpus& c, const DistillConfig& cfg,
                                  const TrainOptions& opt) {
  cfg.validate();
  require(opt.steps >= 1, ErrorCode::InvalidArgument, "steps must be >= 1");
  require(std::isfinite(opt.lr) && opt.lr > 0.0, ErrorCode::InvalidArgument, "lr must be > 0");
  for (std::size_t l : c.languages_of(LangClass::Foundational)) teacher.encoder.index(c.languages[l].name);

  ToyModel student = teacher;
  for (std::size_t l : c.languages_of(LangClass::New))
    if (!student.encoder.find(c.languages[l].name)) student.encoder.add_language(c.languages[l].name);
  if (student.encoder.unk.empty()) student.encoder.unk = Matrix::identity(student.encoder.dim());

  StageReport r;
  r.stage = "distill";
  r.before = evaluate(teacher, c, opt.threads);
  std::mt19937_64 rng(opt.seed);
  const std::size_t d = student.encoder.dim();

  for (std::size_t s = 0; s < opt.steps; ++s) {
    const auto rows = detail::assign_directions(c, c.directions, student.step);
    const std::size_t n = rows.cid.size();
    DistillBatch batch;
    batch.student_sources = Matrix(n, d);
    batch.teacher_sources = Matrix(n, d);
    batch.teacher_targets = Matrix(n, d);
    std::vector<const Matrix*> used(n);
    std::vector<Matrix*> used_grad(n);
    detail::EncoderGrad eg(student.encoder);
    for (std::size_t i = 0; i < n; ++i) {
      const SynthLanguage& sl = c.languages[rows.src_lang[i]];
      const SynthLanguage& tl = c.languages[rows.tgt_lang[i]];
      const auto x = c.sentences[rows.src_lang[i]].row(rows.cid[i]);
      const auto y = c.sentences[rows.tgt_lang[i]].row(rows.cid[i]);
      batch.tags.push_back({sl.name, sl.lang_class, sl.is_english});
      const bool drop = language_drop(sl.name, sl.lang_class, rng, cfg) == kUnspecifiedLanguage + ":";
      const std::size_t li = student.encoder.index(sl.name);
      used[i] = drop ? &student.encoder.unk : &student.encoder.maps[li];
      used_grad[i] = drop ? &eg.unk : &eg.maps[li];
      student.encoder.encode(*used[i], x, batch.student_sources.row(i));
      const ToyEncoder& te = teacher.encoder;
      te.encode(te.maps[te.index(tl.name)], y, batch.teacher_targets.row(i));
      if (sl.lang_class == LangClass::Foundational)
        te.encode(te.maps[te.index(sl.name)], x, batch.teacher_sources.row(i));
      else
        std::copy(batch.teacher_targets.row(i).begin(), batch.teacher_targets.row(i).end(),
                  batch.teacher_sources.row(i).begin());
    }
    const LossOutput out = detail::guarded_step(student.step, "distill", [&] { return distill_batch(batch, cfg); });
    detail::require_finite_loss(out.value, student.step, "distill");
    const Matrix& g = out.grad(grad::student);
    for (std::size_t i = 0; i < n; ++i)
      eg.add(*used_grad[i], c.sentences[rows.src_lang[i]].row(rows.cid[i]), g.row(i));
    eg.apply(student.encoder, opt.lr);
    require(student.encoder.all_finite(), ErrorCode::DivergedLoss,
            "student weights became non-finite at step " + std::to_string(student.step));
    r.loss_trace.push_back(out.value);
    detail::require_bounded_trace(r.loss_trace, student.step, "distill");
    ++student.step;
  }

  r.after = evaluate(student, c, opt.threads);
  r.preservation_delta = r.after.xsim_foundational - r.before.xsim_foundational;
  r.decode_preservation_delta = r.after.decode_error_foundational - r.before.decode_error_foundational;
  r.decode_nll_delta = r.after.decode_nll_foundational - r.before.decode_nll_foundational;

  double drift = 0.0;
  std::size_t count = 0;
  std::vector<double> a(d), b(d);
  for (std::size_t l : c.languages_of(LangClass::Foundational)) {
    const std::string& name = c.languages[l].name;
    for (std::size_t cid = 0; cid < c.cfg.n_concepts; ++cid) {
      student.encoder.encode(student.encoder.maps[student.encoder.index(name)], c.sentences[l].row(cid), a);
      teacher.encoder.encode(teacher.encoder.maps[teacher.encoder.index(name)], c.sentences[l].row(cid), b);
      for (std::size_t k = 0; k < d; ++k) drift += (a[k] - b[k]) * (a[k] - b[k]);
      ++count;
    }
  }
  r.teacher_drift = count ? drift / static_cast<double>(count) : 0.0;
  return {std::move(student), std::move(r)};
}

struct PipelineConfig {
  SynthCorpusConfig corpus;
  LossConfig loss;
  DistillConfig distill;
  TrainOptions stage2;
  TrainOptions stage3;
  TrainOptions stage4{2.0, 300};

  /// One seed for the corpus and every stage.
  void set_seed(std::uint64_t seed) { corpus.seed = stage2.seed = stage3.seed = stage4.seed = seed; }
  void set_threads(unsigned t) { stage2.threads = stage3.threads = stage4.threads = t; }
};

struct PipelineRun {
  SynthCorpus corpus;
  StageResult stage2;
  StageResult stage3;
  StageResult stage4;
};

/// Stages 2, 3 and 4 back to back; stage 4 distils the stage-3 model.
inline PipelineRun run_pipeline(const PipelineConfig& cfg) {
  PipelineRun run{synth_corpus(cfg.corpus), {}, {}, {}};
  run.stage2 = train_stage2(run.corpus, cfg.loss, cfg.stage2);
  run.stage3 = train_stage3(run.stage2.model, run.corpus, cfg.loss, cfg.stage3);
  run.stage4 = distill_stage4(run.stage3.model, run.corpus, cfg.distill, cfg.stage4);
  return run;
}

/// Trailing moving average over full windows only; the result has
/// xs.size() - window + 1 entries.
inline std::vector<double> smooth(std::span<const double> xs, std::size_t window) {
  require(window >= 1, ErrorCode::InvalidArgument, "smoothing window must be >= 1");
  std::vector<double> out;
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += xs[i];
    if (i >= window) s -= xs[i - window];
    if (i + 1 >= window) out.push_back(s / static_cast<double>(window));
  }
  return out;
}

}  // namespace oek
