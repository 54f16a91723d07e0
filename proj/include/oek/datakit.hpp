#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "oek/embed_core.hpp"
#include "oek/random.hpp"

namespace oek {

// ---------------------------------------------------------------- sampling

/// p_l = (n_l/N)^beta, renormalised.
inline std::vector<double> sampling_weights(std::span<const double> counts, double beta) {
  require(!counts.empty(), ErrorCode::NonPositiveCount, "no counts to sample from");
  require(std::isfinite(beta) && beta >= 0.0, ErrorCode::InvalidArgument, "beta must be finite and >= 0");
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    require(std::isfinite(counts[i]) && counts[i] > 0.0, ErrorCode::NonPositiveCount,
            "count " + std::to_string(i) + " is not positive");
    total += counts[i];
  }
  std::vector<double> p(counts.size());
  double z = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) z += p[i] = std::pow(counts[i] / total, beta);
  for (double& x : p) x /= z;
  return p;
}

struct SamplerConfig {
  double beta_lang = 0.5;
  double beta_source = 0.5;
  std::map<std::string, std::map<std::string, double>> counts;  // source -> lang -> n

  void validate() const {
    require(std::isfinite(beta_lang) && beta_lang >= 0.0, ErrorCode::InvalidArgument, "beta_lang must be >= 0");
    require(std::isfinite(beta_source) && beta_source >= 0.0, ErrorCode::InvalidArgument,
            "beta_source must be >= 0");
    require(!counts.empty(), ErrorCode::NonPositiveCount, "sampler has no sources");
    for (const auto& [src, langs] : counts) {
      require(!langs.empty(), ErrorCode::NonPositiveCount, "source '" + src + "' has no languages");
      for (const auto& [lang, n] : langs)
        require(std::isfinite(n) && n > 0.0, ErrorCode::NonPositiveCount,
                "count for " + src + "/" + lang + " is not positive");
    }
  }
};

/// Source probabilities over per-source totals.
inline std::vector<double> source_weights(const SamplerConfig& cfg) {
  std::vector<double> totals;
  for (const auto& [src, langs] : cfg.counts) {
    double t = 0.0;
    for (const auto& [lang, n] : langs) t += n;
    totals.push_back(t);
  }
  return sampling_weights(totals, cfg.beta_source);
}

inline std::vector<double> language_weights(const std::map<std::string, double>& langs, double beta) {
  std::vector<double> n;
  for (const auto& [lang, c] : langs) n.push_back(c);
  return sampling_weights(n, beta);
}

/// Source first, then language within the source.
inline std::pair<std::string, std::string> two_stage_sample(const SamplerConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const auto ps = source_weights(cfg);
  auto src = std::next(cfg.counts.begin(), static_cast<std::ptrdiff_t>(sample_index(ps, rng)));
  const auto pl = language_weights(src->second, cfg.beta_lang);
  auto lang = std::next(src->second.begin(), static_cast<std::ptrdiff_t>(sample_index(pl, rng)));
  return {src->first, lang->first};
}

/// Analytic joint probability of every (source, lang) cell.
inline std::map<std::pair<std::string, std::string>, double> two_stage_probabilities(const SamplerConfig& cfg) {
  cfg.validate();
  const auto ps = source_weights(cfg);
  std::map<std::pair<std::string, std::string>, double> out;
  std::size_t s = 0;
  for (const auto& [src, langs] : cfg.counts) {
    const auto pl = language_weights(langs, cfg.beta_lang);
    std::size_t l = 0;
    for (const auto& [lang, n] : langs) out[{src, lang}] = ps[s] * pl[l++];
    ++s;
  }
  return out;
}

// ---------------------------------------------------------------- thresholds

struct ThresholdSpec {
  double mean = 0.0;
  double stddev = 0.0;
  double k = 0.0;
  double cutoff = 0.0;
};

/// mu - k*sigma with the population standard deviation.
inline ThresholdSpec score_threshold(std::span<const double> scores, double k) {
  require(scores.size() >= 2, ErrorCode::TooFewScores, "need at least 2 scores, got " + std::to_string(scores.size()));
  require(std::isfinite(k) && k >= 0.0, ErrorCode::InvalidArgument, "k must be finite and >= 0");
  double mu = 0.0;
  for (double s : scores) {
    require(std::isfinite(s), ErrorCode::NonFinite, "non-finite score");
    mu += s;
  }
  mu /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mu) * (s - mu);
  var /= static_cast<double>(scores.size());
  ThresholdSpec t{mu, std::sqrt(var), k, 0.0};
  t.cutoff = t.mean - k * t.stddev;
  return t;
}

// ---------------------------------------------------------------- pairs

struct Pair {
  std::string src_key;
  std::string tgt_key;
  double score = 0.0;
  std::int64_t len_src = 0;
  std::int64_t len_tgt = 0;
  std::string lang_src;
  std::string lang_tgt;

  bool operator==(const Pair&) const = default;
};

struct Rejection {
  std::size_t index;   // position in the input
  std::string reason;  // "score" or "length"
};

struct FilterResult {
  std::vector<Pair> kept;
  std::vector<Rejection> rejected;
};

struct RatioBounds {
  double lo = 0.25;
  double hi = 4.0;
};

/// Length ratio after dividing each side by its language's expected length.
inline double normalized_length_ratio(const Pair& p, const std::map<std::string, double>& expected_len) {
  auto es = expected_len.find(p.lang_src);
  auto et = expected_len.find(p.lang_tgt);
  require(es != expected_len.end(), ErrorCode::MissingExpectedLength, "no expected length for '" + p.lang_src + "'");
  require(et != expected_len.end(), ErrorCode::MissingExpectedLength, "no expected length for '" + p.lang_tgt + "'");
  return (static_cast<double>(p.len_src) / es->second) / (static_cast<double>(p.len_tgt) / et->second);
}

/// Score rule is checked first; a pair failing both is logged as "score".
inline FilterResult filter_pairs(const std::vector<Pair>& pairs, double cutoff, RatioBounds bounds,
                                 const std::map<std::string, double>& expected_len) {
  require(bounds.lo > 0.0 && bounds.lo <= bounds.hi, ErrorCode::InvalidArgument, "ratio bounds need 0 < lo <= hi");
  for (const auto& [lang, e] : expected_len)
    require(std::isfinite(e) && e > 0.0, ErrorCode::InvalidArgument, "expected length for '" + lang + "' must be > 0");
  FilterResult r;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pair& p = pairs[i];
    const double ratio = normalized_length_ratio(p, expected_len);
    if (!(p.score >= cutoff))
      r.rejected.push_back({i, "score"});
    else if (!(ratio >= bounds.lo && ratio <= bounds.hi))
      r.rejected.push_back({i, "length"});
    else
      r.kept.push_back(p);
  }
  return r;
}

/// Keep-first global dedup: every text appears at most once, as source or
/// target, among the survivors.
inline std::vector<Pair> dedup(const std::vector<Pair>& pairs) {
  std::unordered_set<std::string> seen;
  std::vector<Pair> out;
  for (const Pair& p : pairs) {
    if (seen.contains(p.src_key) || seen.contains(p.tgt_key)) continue;
    seen.insert(p.src_key);
    seen.insert(p.tgt_key);
    out.push_back(p);
  }
  return out;
}

/// Exception rule for low-resource directions: keep the data undeduplicated
/// when retrieval is still poor and the direction is small.
inline bool keep_undeduplicated(double xsimpp_error_percent, std::size_t n_samples) {
  return xsimpp_error_percent > 10.0 && n_samples < 1'000'000;
}

// ---------------------------------------------------------------- synthetic corpus

enum class HardNegKind { Negate, EntitySwap, NumberShift };

inline std::string to_string(HardNegKind k) {
  switch (k) {
    case HardNegKind::Negate: return "negate";
    case HardNegKind::EntitySwap: return "entity_swap";
    case HardNegKind::NumberShift: return "number_shift";
  }
  return "?";
}

inline HardNegKind hard_neg_kind_from_string(const std::string& s) {
  if (s == "negate") return HardNegKind::Negate;
  if (s == "entity_swap") return HardNegKind::EntitySwap;
  if (s == "number_shift") return HardNegKind::NumberShift;
  fail(ErrorCode::InvalidArgument, "unknown hard-negative kind '" + s + "'");
}

struct SynthCorpusConfig {
  std::size_t n_concepts = 512;
  std::size_t dim = 16;
  std::size_t n_foundational_langs = 6;  // English included
  std::size_t n_new_langs = 4;
  double noise_sigma = 0.07;
  std::vector<HardNegKind> hard_neg_kinds{HardNegKind::Negate, HardNegKind::EntitySwap, HardNegKind::NumberShift};
  std::uint64_t seed = 17;
  std::size_t hard_negatives_per_concept = 5;
  double heldout_fraction = 0.2;
  double number_shift = 0.35;  // norm of the offset before renormalising
  // The last detail_dims coordinates carry fine-grained meaning at a smaller
  // scale. Negation and number shifts only touch these coordinates.
  std::size_t detail_dims = 6;
  double detail_scale = 0.5;
  bool identity_transforms = false;

  void validate() const {
    require(dim >= 2, ErrorCode::BadDim, "dim must be >= 2, got " + std::to_string(dim));
    require(n_concepts >= 1 && n_foundational_langs >= 1, ErrorCode::InvalidArgument,
            "n_concepts and n_foundational_langs must be >= 1");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, ErrorCode::InvalidArgument, "noise_sigma must be >= 0");
    require(!hard_neg_kinds.empty(), ErrorCode::InvalidArgument, "hard_neg_kinds is empty");
    require(heldout_fraction >= 0.0 && heldout_fraction < 1.0, ErrorCode::InvalidArgument,
            "heldout_fraction must be in [0, 1)");
    require(std::isfinite(number_shift) && number_shift > 0.0, ErrorCode::InvalidArgument, "number_shift must be > 0");
    require(detail_dims <= dim, ErrorCode::BadDim, "detail_dims exceeds dim");
    require(std::isfinite(detail_scale) && detail_scale > 0.0, ErrorCode::InvalidArgument, "detail_scale must be > 0");
  }

  /// First coordinate of the detail block; 0 when the block is empty, so
  /// perturbations then range over all coordinates.
  std::size_t detail_begin() const { return detail_dims == 0 ? 0 : dim - detail_dims; }
};

struct SynthLanguage {
  std::string name;
  LangClass lang_class = LangClass::Foundational;
  bool is_english = false;
  int quality_rank = 0;  // lower is better; English is 0
  double noise_sigma = 0.0;
  Matrix transform;      // d x d, applied as transform * concept
};

struct Direction {
  std::size_t src_lang;
  std::size_t tgt_lang;
  bool operator==(const Direction&) const = default;
};

struct SynthCorpus {
  SynthCorpusConfig cfg;
  Matrix concepts;                            // n_concepts x d, unit rows
  std::vector<SynthLanguage> languages;       // English first, then foundational, then new
  std::vector<Matrix> sentences;              // per language, n_concepts x d
  std::vector<Matrix> hard_negatives;         // per language, (n_concepts * k) x d, concept-major
  std::vector<HardNegKind> hard_negative_slots;  // kind of slot h, length k
  std::vector<std::size_t> train_concepts;
  std::vector<std::size_t> heldout_concepts;
  std::vector<Direction> directions;          // curated (src, tgt) language pairs

  std::size_t english() const { return 0; }
  std::size_t language_index(const std::string& name) const {
    for (std::size_t i = 0; i < languages.size(); ++i)
      if (languages[i].name == name) return i;
    fail(ErrorCode::UnknownLanguage, "language '" + name + "' is not in the corpus");
  }
  std::vector<std::size_t> languages_of(LangClass c) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < languages.size(); ++i)
      if (languages[i].lang_class == c) out.push_back(i);
    return out;
  }
  std::size_t k() const { return cfg.hard_negatives_per_concept; }
};

/// Keeps (src, tgt) only when the target is at least as good as the source.
/// Targets are restricted to foundational languages; English sources only
/// pair with English (monolingual anchors).
inline std::vector<Direction> curate_directions(const std::vector<SynthLanguage>& langs) {
  std::vector<Direction> out;
  for (std::size_t s = 0; s < langs.size(); ++s) {
    for (std::size_t t = 0; t < langs.size(); ++t) {
      if (langs[t].lang_class != LangClass::Foundational) continue;
      if (langs[s].is_english && !langs[t].is_english) continue;
      if (langs[t].quality_rank > langs[s].quality_rank) continue;
      if (s == t && !langs[s].is_english) continue;
      out.push_back({s, t});
    }
  }
  return out;
}

namespace detail {

inline void observe(const Matrix& transform, std::span<const double> point, double sigma, std::mt19937_64& rng,
                    std::span<double> out) {
  const std::size_t d = point.size();
  for (std::size_t i = 0; i < d; ++i) out[i] = dot(transform.row(i), point);
  if (sigma > 0.0)
    for (std::size_t i = 0; i < d; ++i) out[i] += sigma * standard_normal(rng);
}

inline void normalize(std::span<double> v) {
  const double n = norm(v);
  for (double& x : v) x /= n;
}

/// Other concepts ordered by decreasing cosine to concept c.
inline std::vector<std::size_t> neighbours_by_cosine(const Matrix& concepts, std::size_t c, std::size_t count) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t j = 0; j < concepts.rows(); ++j)
    if (j != c) scored.emplace_back(-dot(concepts.row(c), concepts.row(j)), j);
  count = std::min(count, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(count), scored.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace detail

/// Latent concepts observed through per-language orthogonal maps plus noise.
/// Hard negatives perturb the concept geometrically and are then observed
/// through the same language map.
inline SynthCorpus synth_corpus(const SynthCorpusConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t d = cfg.dim, n = cfg.n_concepts, k = cfg.hard_negatives_per_concept;

  SynthCorpus c;
  c.cfg = cfg;
  c.concepts = Matrix(n, d);
  const std::size_t fine = cfg.detail_begin();
  for (std::size_t i = 0; i < n; ++i) {
    auto row = c.concepts.row(i);
    for (std::size_t j = 0; j < d; ++j) row[j] = standard_normal(rng) * (j >= fine && cfg.detail_dims ? cfg.detail_scale : 1.0);
    while (norm(row) == 0.0) row[uniform_index(d, rng)] = 1.0;
    detail::normalize(row);
  }

  const std::size_t n_langs = cfg.n_foundational_langs + cfg.n_new_langs;
  for (std::size_t l = 0; l < n_langs; ++l) {
    SynthLanguage lang;
    lang.is_english = l == 0;
    lang.lang_class = l < cfg.n_foundational_langs ? LangClass::Foundational : LangClass::New;
    lang.name = lang.is_english ? std::string("eng")
                : lang.lang_class == LangClass::Foundational ? "f" + std::to_string(l)
                                                             : "n" + std::to_string(l - cfg.n_foundational_langs + 1);
    lang.quality_rank = static_cast<int>(l);
    // Quality degrades with rank: noise grows by 10% per step.
    lang.noise_sigma = cfg.noise_sigma * (1.0 + 0.1 * static_cast<double>(l));
    lang.transform = (lang.is_english || cfg.identity_transforms) ? Matrix::identity(d) : random_orthogonal(d, rng);
    c.languages.push_back(std::move(lang));
  }

  for (std::size_t h = 0; h < k; ++h) c.hard_negative_slots.push_back(cfg.hard_neg_kinds[h % cfg.hard_neg_kinds.size()]);

  // Perturbed concepts are shared across languages so every language sees
  // the same semantic distractors.
  Matrix perturbed(n * k, d);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t swaps = 0;
    for (std::size_t h = 0; h < k; ++h) {
      if (c.hard_negative_slots[h] == HardNegKind::EntitySwap) ++swaps;
    }
    const auto nearest = swaps > 0 && n > 1 ? detail::neighbours_by_cosine(c.concepts, i, swaps) : std::vector<std::size_t>{};
    std::size_t swap_seen = 0;
    for (std::size_t h = 0; h < k; ++h) {
      auto out = perturbed.row(i * k + h);
      const auto src = c.concepts.row(i);
      std::copy(src.begin(), src.end(), out.begin());
      switch (c.hard_negative_slots[h]) {
        case HardNegKind::Negate: {
          out[fine + uniform_index(d - fine, rng)] *= -1.0;
          break;
        }
        case HardNegKind::EntitySwap: {
          if (!nearest.empty()) {
            const auto other = c.concepts.row(nearest[std::min(swap_seen, nearest.size() - 1)]);
            std::copy(other.begin(), other.end(), out.begin());
          } else {
            out[fine + uniform_index(d - fine, rng)] *= -1.0;
          }
          ++swap_seen;
          break;
        }
        case HardNegKind::NumberShift: {
          const auto u = random_unit_vector(d - fine, rng);
          axpy(cfg.number_shift, u, out.subspan(fine));
          detail::normalize(out);
          break;
        }
      }
    }
  }

  for (const SynthLanguage& lang : c.languages) {
    Matrix s(n, d), hn(n * k, d);
    for (std::size_t i = 0; i < n; ++i) detail::observe(lang.transform, c.concepts.row(i), lang.noise_sigma, rng, s.row(i));
    for (std::size_t r = 0; r < n * k; ++r) detail::observe(lang.transform, perturbed.row(r), lang.noise_sigma, rng, hn.row(r));
    c.sentences.push_back(std::move(s));
    c.hard_negatives.push_back(std::move(hn));
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(i, rng)]);
  const auto held = static_cast<std::size_t>(std::floor(cfg.heldout_fraction * static_cast<double>(n)));
  c.heldout_concepts.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  c.train_concepts.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(c.heldout_concepts.begin(), c.heldout_concepts.end());
  std::sort(c.train_concepts.begin(), c.train_concepts.end());

  c.directions = curate_directions(c.languages);
  return c;
}

/// Rows of m at the given indices.
inline Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = m.row(idx[i]);
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

/// Hard negatives of the given concepts in one language, concept-major.
inline Matrix gather_hard_negatives(const SynthCorpus& c, std::size_t lang, std::span<const std::size_t> concepts) {
  const std::size_t k = c.k();
  Matrix out(concepts.size() * k, c.cfg.dim);
  for (std::size_t i = 0; i < concepts.size(); ++i)
    for (std::size_t h = 0; h < k; ++h) {
      const auto r = c.hard_negatives[lang].row(concepts[i] * k + h);
      std::copy(r.begin(), r.end(), out.row(i * k + h).begin());
    }
  return out;
}

}  // namespace oek
