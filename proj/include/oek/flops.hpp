#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "oek/error.hpp"

namespace oek {

// Dense-transformer accounting. One multiply-add is 2 FLOPs. Per layer and
// token, the projections cost 2 * (4 h^2 + 3 h ffn) (Q, K, V, O and a gated
// three-matrix MLP). One query attending over L positions costs 4 h L (scores
// plus weighted sum). Softmax, norms and embedding lookups are free. The LM
// head is left out on both sides, which keeps every total linear in depth.

struct ModelShape {
  std::uint64_t layers = 0;
  std::uint64_t hidden = 0;
  std::uint64_t ffn = 0;
  std::uint64_t heads = 0;
  std::uint64_t vocab = 0;

  void validate(const std::string& what) const {
    require(layers >= 1 && hidden >= 1 && ffn >= 1 && heads >= 1 && vocab >= 1, ErrorCode::InvalidArgument,
            what + ": layers, hidden, ffn, heads and vocab must be positive");
    require(hidden % heads == 0, ErrorCode::InvalidArgument, what + ": hidden must be divisible by heads");
  }

  std::uint64_t layer_params() const { return 4 * hidden * hidden + 3 * hidden * ffn; }
  /// Non-embedding parameters plus the input embedding table.
  std::uint64_t params() const { return layers * layer_params() + vocab * hidden; }

  bool operator==(const ModelShape&) const = default;
};

namespace shapes {
inline constexpr ModelShape llama_3b{28, 3072, 8192, 24, 128256};
inline constexpr ModelShape llama_8b{32, 4096, 14336, 32, 128256};
inline constexpr ModelShape sentence_encoder_1_5b{16, 2048, 8192, 32, 256000};
// 6 layers at the width of a 70B model; vocab is unused on the embedding side.
inline constexpr ModelShape embedding_encoder_5b{6, 8192, 28672, 64, 1};
}  // namespace shapes

struct DecoderOnlyFlops {
  std::uint64_t prefill = 0;
  std::uint64_t generation = 0;
  std::uint64_t total() const { return prefill + generation; }
};

struct EncDecFlops {
  std::uint64_t sentence_encoder = 0;
  std::uint64_t encoder = 0;
  std::uint64_t decoder_self = 0;
  std::uint64_t cross_attention = 0;
  std::uint64_t sentences = 0;  // cross-attention memory length
  std::uint64_t encoder_side() const { return sentence_encoder + encoder; }
  std::uint64_t total() const { return sentence_encoder + encoder + decoder_self + cross_attention; }
};

namespace detail {

inline std::uint64_t dense(const ModelShape& s) { return 2 * s.layer_params(); }

/// L positions, each attending over all L.
inline std::uint64_t bidirectional_pass(const ModelShape& s, std::uint64_t len) {
  if (len == 0) return 0;
  return s.layers * (len * dense(s) + 4 * s.hidden * len * len);
}

/// Positions start+1 .. start+len attend causally over 1..position.
inline std::uint64_t causal_pass(const ModelShape& s, std::uint64_t start, std::uint64_t len) {
  if (len == 0) return 0;
  // sum_{t=1}^{len} (start + t) = len*start + len(len+1)/2
  const std::uint64_t keys = len * start + len * (len + 1) / 2;
  return s.layers * (len * dense(s) + 4 * s.hidden * keys);
}

}  // namespace detail

/// Prefill over the prompt, then KV-cached generation where output token t
/// attends over input + t positions.
inline DecoderOnlyFlops decoder_only_flops(const ModelShape& shape, std::uint64_t input_tokens,
                                           std::uint64_t output_tokens) {
  shape.validate("decoder");
  return {detail::causal_pass(shape, 0, input_tokens), detail::causal_pass(shape, input_tokens, output_tokens)};
}

inline std::uint64_t sentence_count(std::uint64_t input_tokens, double tokens_per_sentence) {
  require(tokens_per_sentence > 0.0, ErrorCode::InvalidArgument, "tokens_per_sentence must be > 0");
  const double q = static_cast<double>(input_tokens) / tokens_per_sentence;
  auto n = static_cast<std::uint64_t>(q);
  if (static_cast<double>(n) < q) ++n;
  return n;
}

/// Sentence encoder over the input split into n sentences of near-equal
/// integer length, embedding encoder over the n sentence vectors, decoder
/// self-attention over the output only, and cross-attention over the n
/// vectors. A sentence encoder with 0 layers is free.
inline EncDecFlops encdec_flops(const ModelShape& encoder, const ModelShape& decoder, std::uint64_t input_tokens,
                                std::uint64_t output_tokens, double tokens_per_sentence,
                                const ModelShape& sentence_encoder) {
  encoder.validate("encoder");
  decoder.validate("decoder");
  EncDecFlops f;
  f.sentences = sentence_count(input_tokens, tokens_per_sentence);
  const std::uint64_t n = f.sentences;

  if (sentence_encoder.layers > 0 && n > 0) {
    sentence_encoder.validate("sentence encoder");
    const std::uint64_t base = input_tokens / n, longer = input_tokens % n;
    f.sentence_encoder = longer * detail::bidirectional_pass(sentence_encoder, base + 1) +
                         (n - longer) * detail::bidirectional_pass(sentence_encoder, base);
  }
  f.encoder = detail::bidirectional_pass(encoder, n);
  f.decoder_self = detail::causal_pass(decoder, 0, output_tokens);

  const std::uint64_t hd = decoder.hidden, he = encoder.hidden;
  // Per decoder layer: K/V of the memory once, Q/O per output token, scores
  // and weighted sum of each output token over n vectors.
  const std::uint64_t kv = n * 2 * 2 * he * hd;
  const std::uint64_t qo = output_tokens * 2 * 2 * hd * hd;
  const std::uint64_t attn = output_tokens * 4 * hd * n;
  f.cross_attention = output_tokens == 0 ? 0 : decoder.layers * (kv + qo + attn);
  return f;
}

struct ComparisonShapes {
  ModelShape decoder_only = shapes::llama_3b;
  ModelShape encoder = shapes::embedding_encoder_5b;
  ModelShape encdec_decoder = shapes::llama_3b;
  ModelShape sentence_encoder = shapes::sentence_encoder_1_5b;
};

struct WorkloadGrid {
  std::vector<std::uint64_t> input_tokens;
  std::vector<std::uint64_t> output_tokens;
  double tokens_per_sentence = 20.0;

  void validate() const {
    require(!input_tokens.empty() && !output_tokens.empty(), ErrorCode::InvalidArgument, "grid axes must be non-empty");
    for (auto v : input_tokens) require(v > 0, ErrorCode::InvalidArgument, "input axis must be positive");
    for (auto v : output_tokens) require(v > 0, ErrorCode::InvalidArgument, "output axis must be positive");
    require(tokens_per_sentence > 0.0, ErrorCode::InvalidArgument, "tokens_per_sentence must be > 0");
  }
};

/// "lo:hi:xF" geometric axis (lo, lo*F, ... <= hi) or "lo:hi:+S" arithmetic.
inline std::vector<std::uint64_t> parse_axis(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  require(b != std::string::npos, ErrorCode::FormatError, "axis '" + spec + "' is not lo:hi:xF or lo:hi:+S");
  std::uint64_t lo = 0, hi = 0, step = 0;
  char op = 0;
  try {
    lo = std::stoull(spec.substr(0, a));
    hi = std::stoull(spec.substr(a + 1, b - a - 1));
    op = b + 1 < spec.size() ? spec[b + 1] : 0;
    step = std::stoull(spec.substr(b + 2));
  } catch (const std::exception&) {
    fail(ErrorCode::FormatError, "axis '" + spec + "' has a non-numeric field");
  }
  require(lo > 0 && lo <= hi, ErrorCode::FormatError, "axis '" + spec + "' needs 0 < lo <= hi");
  require((op == 'x' && step >= 2) || (op == '+' && step >= 1), ErrorCode::FormatError,
          "axis '" + spec + "' needs a step of x2 or more, or +1 or more");
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = lo; v <= hi; v = op == 'x' ? v * step : v + step) out.push_back(v);
  return out;
}

struct RatioCell {
  std::uint64_t input_tokens;
  std::uint64_t output_tokens;
  std::uint64_t decoder_only;
  std::uint64_t encdec;
  std::uint64_t encdec_encoder_side;
  double ratio;
};

struct RatioTable {
  WorkloadGrid grid;
  std::vector<RatioCell> cells;  // input-major

  const RatioCell& at(std::size_t in_idx, std::size_t out_idx) const {
    return cells.at(in_idx * grid.output_tokens.size() + out_idx);
  }

  /// Output columns along which the ratio is not strictly increasing in input.
  std::vector<std::uint64_t> non_monotone_columns() const {
    std::vector<std::uint64_t> bad;
    for (std::size_t o = 0; o < grid.output_tokens.size(); ++o)
      for (std::size_t i = 1; i < grid.input_tokens.size(); ++i)
        if (!(at(i, o).ratio > at(i - 1, o).ratio)) {
          bad.push_back(grid.output_tokens[o]);
          break;
        }
    return bad;
  }

  std::string to_csv() const {
    std::string s = "input_tokens,output_tokens,decoder_only_flops,encdec_flops,encdec_encoder_flops,ratio\n";
    char buf[160];
    for (const auto& c : cells) {
      std::snprintf(buf, sizeof buf, "%llu,%llu,%llu,%llu,%llu,%.6f\n",
                    static_cast<unsigned long long>(c.input_tokens), static_cast<unsigned long long>(c.output_tokens),
                    static_cast<unsigned long long>(c.decoder_only), static_cast<unsigned long long>(c.encdec),
                    static_cast<unsigned long long>(c.encdec_encoder_side), c.ratio);
      s += buf;
    }
    return s;
  }
};

/// decoder_only / encdec for every grid cell.
inline RatioTable compare(const ComparisonShapes& s, const WorkloadGrid& grid) {
  grid.validate();
  RatioTable t{grid, {}};
  for (auto in : grid.input_tokens)
    for (auto out : grid.output_tokens) {
      const auto d = decoder_only_flops(s.decoder_only, in, out).total();
      const auto e = encdec_flops(s.encoder, s.encdec_decoder, in, out, grid.tokens_per_sentence, s.sentence_encoder);
      t.cells.push_back({in, out, d, e.total(), e.encoder_side(),
                         static_cast<double>(d) / static_cast<double>(e.total())});
    }
  return t;
}

}  // namespace oek
