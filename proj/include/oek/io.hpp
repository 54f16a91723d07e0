#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oek/codeseg.hpp"
#include "oek/datakit.hpp"
#include "oek/distill.hpp"
#include "oek/flops.hpp"
#include "oek/losses.hpp"
#include "oek/pipeline.hpp"
#include "oek/retrieval.hpp"

namespace oek {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorCode::IoError, "short write to '" + path + "'");
}

// ---------------------------------------------------------------- OEM1

// "OEM1", u32 N, u32 d, N*d float32, all little-endian, row-major.

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
  return v;
}

}  // namespace detail

inline std::string encode_oem1(const Matrix& m) {
  require(m.rows() <= 0xffffffffu && m.cols() <= 0xffffffffu, ErrorCode::FormatError, "matrix too large for OEM1");
  std::string s = "OEM1";
  detail::put_u32(s, static_cast<std::uint32_t>(m.rows()));
  detail::put_u32(s, static_cast<std::uint32_t>(m.cols()));
  s.reserve(12 + 4 * m.size());
  for (double v : m.flat()) detail::put_u32(s, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return s;
}

inline Matrix decode_oem1(const std::string& bytes, const std::string& what = "OEM1 data") {
  require(bytes.size() >= 12 && bytes.compare(0, 4, "OEM1") == 0, ErrorCode::FormatError, what + ": bad magic");
  const std::uint64_t n = detail::get_u32(bytes, 4), d = detail::get_u32(bytes, 8);
  require(bytes.size() == 12 + 4 * n * d, ErrorCode::FormatError,
          what + ": expected " + std::to_string(12 + 4 * n * d) + " bytes, found " + std::to_string(bytes.size()));
  Matrix m(n, d);
  auto flat = m.flat();
  for (std::size_t k = 0; k < n * d; ++k) flat[k] = std::bit_cast<float>(detail::get_u32(bytes, 12 + 4 * k));
  return m;
}

inline Matrix read_oem1(const std::string& path) { return decode_oem1(read_file(path), path); }
inline void write_oem1(const std::string& path, const Matrix& m) { write_file(path, encode_oem1(m)); }

// ---------------------------------------------------------------- strict objects

/// Reads fields from a JSON object and rejects any key that was not read.
class StrictObject {
 public:
  StrictObject(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    require(j.is_object(), ErrorCode::FormatError, where_ + ": expected a JSON object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::FormatError, where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void expect_schema(const std::string& schema) {
    seen_.insert("schema");
    auto it = j_.find("schema");
    require(it != j_.end() && it->is_string(), ErrorCode::FormatError, where_ + ": missing \"schema\" field");
    require(it->get<std::string>() == schema, ErrorCode::FormatError,
            where_ + ": schema is '" + it->get<std::string>() + "', expected '" + schema + "'");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      require(seen_.contains(it.key()), ErrorCode::FormatError, where_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, where + ": " + e.what());
  }
}

// ---------------------------------------------------------------- configs

namespace schema {
inline const std::string loss = "oek.loss/1";
inline const std::string distill = "oek.distill/1";
inline const std::string corpus = "oek.corpus/1";
inline const std::string pipeline = "oek.pipeline/1";
inline const std::string sampler = "oek.sampler/1";
inline const std::string flops = "oek.flops/1";
}  // namespace schema

inline json to_json(const LossConfig& c) {
  return {{"schema", schema::loss}, {"tau", c.tau},     {"margin", c.margin}, {"radius", c.radius},
          {"alpha", c.alpha},       {"beta", c.beta},   {"gamma", c.gamma},   {"hard_negatives", c.hard_negatives}};
}

inline LossConfig loss_config_from_json(const json& j, bool top = true) {
  LossConfig c;
  StrictObject o(j, "loss config");
  if (top) o.expect_schema(schema::loss);
  else o.child("schema");
  o.get("tau", c.tau);
  o.get("margin", c.margin);
  o.get("radius", c.radius);
  o.get("alpha", c.alpha);
  o.get("beta", c.beta);
  o.get("gamma", c.gamma);
  o.get("hard_negatives", c.hard_negatives);
  o.finish();
  c.validate();
  return c;
}

inline json to_json(const ClassParams& p) {
  return {{"lambda_mse", p.lambda_mse}, {"lambda_st", p.lambda_st}, {"lambda_ts", p.lambda_ts},
          {"tau", p.tau},               {"p_unk", p.p_unk}};
}

inline ClassParams class_params_from_json(const json& j, const std::string& where) {
  ClassParams p;
  StrictObject o(j, where);
  o.get("lambda_mse", p.lambda_mse);
  o.get("lambda_st", p.lambda_st);
  o.get("lambda_ts", p.lambda_ts);
  o.get("tau", p.tau);
  o.get("p_unk", p.p_unk);
  o.finish();
  return p;
}

inline json to_json(const DistillConfig& c) {
  return {{"schema", schema::distill}, {"foundational", to_json(c.foundational)}, {"new", to_json(c.new_lang)}};
}

inline DistillConfig distill_config_from_json(const json& j, bool top = true) {
  DistillConfig c;
  StrictObject o(j, "distill config");
  if (top) o.expect_schema(schema::distill);
  else o.child("schema");
  if (const json* f = o.child("foundational")) c.foundational = class_params_from_json(*f, "distill.foundational");
  if (const json* n = o.child("new")) c.new_lang = class_params_from_json(*n, "distill.new");
  o.finish();
  c.validate();
  return c;
}

inline json to_json(const SynthCorpusConfig& c) {
  json kinds = json::array();
  for (auto k : c.hard_neg_kinds) kinds.push_back(to_string(k));
  return {{"schema", schema::corpus},
          {"n_concepts", c.n_concepts},
          {"dim", c.dim},
          {"n_foundational_langs", c.n_foundational_langs},
          {"n_new_langs", c.n_new_langs},
          {"noise_sigma", c.noise_sigma},
          {"hard_neg_kinds", kinds},
          {"seed", c.seed},
          {"hard_negatives_per_concept", c.hard_negatives_per_concept},
          {"heldout_fraction", c.heldout_fraction},
          {"number_shift", c.number_shift},
          {"detail_dims", c.detail_dims},
          {"detail_scale", c.detail_scale},
          {"identity_transforms", c.identity_transforms}};
}

inline SynthCorpusConfig corpus_config_from_json(const json& j, bool top = true) {
  SynthCorpusConfig c;
  StrictObject o(j, "corpus config");
  if (top) o.expect_schema(schema::corpus);
  else o.child("schema");
  o.get("n_concepts", c.n_concepts);
  o.get("dim", c.dim);
  o.get("n_foundational_langs", c.n_foundational_langs);
  o.get("n_new_langs", c.n_new_langs);
  o.get("noise_sigma", c.noise_sigma);
  std::vector<std::string> kinds;
  o.get("hard_neg_kinds", kinds);
  if (!kinds.empty()) {
    c.hard_neg_kinds.clear();
    for (const auto& k : kinds) c.hard_neg_kinds.push_back(hard_neg_kind_from_string(k));
  }
  o.get("seed", c.seed);
  o.get("hard_negatives_per_concept", c.hard_negatives_per_concept);
  o.get("heldout_fraction", c.heldout_fraction);
  o.get("number_shift", c.number_shift);
  o.get("detail_dims", c.detail_dims);
  o.get("detail_scale", c.detail_scale);
  o.get("identity_transforms", c.identity_transforms);
  o.finish();
  c.validate();
  return c;
}

inline json to_json(const TrainOptions& t) { return {{"lr", t.lr}, {"steps", t.steps}}; }

inline TrainOptions train_options_from_json(const json& j, TrainOptions t, const std::string& where) {
  StrictObject o(j, where);
  o.get("lr", t.lr);
  o.get("steps", t.steps);
  o.finish();
  return t;
}

inline json to_json(const PipelineConfig& c) {
  json corpus = to_json(c.corpus), loss = to_json(c.loss), distill = to_json(c.distill);
  corpus.erase("schema");
  loss.erase("schema");
  distill.erase("schema");
  return {{"schema", schema::pipeline}, {"corpus", corpus},
          {"loss", loss},               {"distill", distill},
          {"stage2", to_json(c.stage2)}, {"stage3", to_json(c.stage3)},
          {"stage4", to_json(c.stage4)}};
}

inline PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  StrictObject o(j, "pipeline config");
  o.expect_schema(schema::pipeline);
  if (const json* v = o.child("corpus")) c.corpus = corpus_config_from_json(*v, false);
  if (const json* v = o.child("loss")) c.loss = loss_config_from_json(*v, false);
  if (const json* v = o.child("distill")) c.distill = distill_config_from_json(*v, false);
  if (const json* v = o.child("stage2")) c.stage2 = train_options_from_json(*v, c.stage2, "pipeline.stage2");
  if (const json* v = o.child("stage3")) c.stage3 = train_options_from_json(*v, c.stage3, "pipeline.stage3");
  if (const json* v = o.child("stage4")) c.stage4 = train_options_from_json(*v, c.stage4, "pipeline.stage4");
  o.finish();
  return c;
}

inline json to_json(const SamplerConfig& c) {
  return {{"schema", schema::sampler}, {"beta_lang", c.beta_lang}, {"beta_source", c.beta_source}, {"counts", c.counts}};
}

inline SamplerConfig sampler_config_from_json(const json& j) {
  SamplerConfig c;
  StrictObject o(j, "sampler config");
  o.expect_schema(schema::sampler);
  o.get("beta_lang", c.beta_lang);
  o.get("beta_source", c.beta_source);
  o.get("counts", c.counts);
  o.finish();
  c.validate();
  return c;
}

inline json to_json(const ModelShape& s) {
  return {{"layers", s.layers}, {"hidden", s.hidden}, {"ffn", s.ffn}, {"heads", s.heads}, {"vocab", s.vocab}};
}

inline ModelShape model_shape_from_json(const json& j, const std::string& where) {
  ModelShape s;
  StrictObject o(j, where);
  o.get("layers", s.layers);
  o.get("hidden", s.hidden);
  o.get("ffn", s.ffn);
  o.get("heads", s.heads);
  o.get("vocab", s.vocab);
  o.finish();
  return s;
}

struct FlopsConfig {
  ComparisonShapes shapes;
  double tokens_per_sentence = 20.0;
};

inline json to_json(const FlopsConfig& c) {
  return {{"schema", schema::flops},
          {"decoder_only", to_json(c.shapes.decoder_only)},
          {"encoder", to_json(c.shapes.encoder)},
          {"encdec_decoder", to_json(c.shapes.encdec_decoder)},
          {"sentence_encoder", to_json(c.shapes.sentence_encoder)},
          {"tokens_per_sentence", c.tokens_per_sentence}};
}

inline FlopsConfig flops_config_from_json(const json& j) {
  FlopsConfig c;
  StrictObject o(j, "flops config");
  o.expect_schema(schema::flops);
  if (const json* v = o.child("decoder_only")) c.shapes.decoder_only = model_shape_from_json(*v, "flops.decoder_only");
  if (const json* v = o.child("encoder")) c.shapes.encoder = model_shape_from_json(*v, "flops.encoder");
  if (const json* v = o.child("encdec_decoder"))
    c.shapes.encdec_decoder = model_shape_from_json(*v, "flops.encdec_decoder");
  if (const json* v = o.child("sentence_encoder"))
    c.shapes.sentence_encoder = model_shape_from_json(*v, "flops.sentence_encoder");
  o.get("tokens_per_sentence", c.tokens_per_sentence);
  o.finish();
  return c;
}

// ---------------------------------------------------------------- JSONL

namespace detail {

template <class Fn>
void for_each_jsonl(const std::string& text, const std::string& where, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string at = where + ":" + std::to_string(no);
    fn(parse_json(line, at), at);
  }
}

inline std::vector<double> vec_field(StrictObject& o, const std::string& key, bool required, const std::string& at) {
  std::vector<double> v;
  const json* c = o.child(key);
  require(c || !required, ErrorCode::FormatError, at + ": missing '" + key + "'");
  if (c) {
    try {
      v = c->get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::FormatError, at + "." + key + ": " + e.what());
    }
  }
  return v;
}

}  // namespace detail

inline std::vector<Pair> parse_pairs_jsonl(const std::string& text, const std::string& where = "pairs") {
  std::vector<Pair> out;
  detail::for_each_jsonl(text, where, [&](const json& j, const std::string& at) {
    Pair p;
    StrictObject o(j, at);
    for (const char* k : {"src_key", "tgt_key", "score", "len_src", "len_tgt", "lang_src", "lang_tgt"})
      require(j.contains(k), ErrorCode::FormatError, at + ": missing '" + k + "'");
    o.get("src_key", p.src_key);
    o.get("tgt_key", p.tgt_key);
    o.get("score", p.score);
    o.get("len_src", p.len_src);
    o.get("len_tgt", p.len_tgt);
    o.get("lang_src", p.lang_src);
    o.get("lang_tgt", p.lang_tgt);
    o.finish();
    out.push_back(std::move(p));
  });
  return out;
}

inline json to_json(const Pair& p) {
  return {{"src_key", p.src_key}, {"tgt_key", p.tgt_key},   {"score", p.score},  {"len_src", p.len_src},
          {"len_tgt", p.len_tgt}, {"lang_src", p.lang_src}, {"lang_tgt", p.lang_tgt}};
}

inline std::string pairs_to_jsonl(const std::vector<Pair>& pairs) {
  std::string s;
  for (const Pair& p : pairs) s += to_json(p).dump() + "\n";
  return s;
}

inline ContrastiveBatch parse_contrastive_jsonl(const std::string& text, const std::string& where = "batch") {
  std::vector<std::vector<double>> src, tgt, gs, gt;
  std::vector<std::vector<std::vector<double>>> hn;
  std::vector<std::string> langs;
  bool any_guide = false, any_hn = false;
  detail::for_each_jsonl(text, where, [&](const json& j, const std::string& at) {
    StrictObject o(j, at);
    src.push_back(detail::vec_field(o, "src", true, at));
    tgt.push_back(detail::vec_field(o, "tgt", true, at));
    gs.push_back(detail::vec_field(o, "guide_src", false, at));
    gt.push_back(detail::vec_field(o, "guide_tgt", false, at));
    any_guide = any_guide || !gs.back().empty() || !gt.back().empty();
    std::vector<std::vector<double>> h;
    o.get("hard_negs", h);
    any_hn = any_hn || j.contains("hard_negs");
    hn.push_back(std::move(h));
    std::string lang;
    o.get("lang", lang);
    langs.push_back(lang);
    o.finish();
  });
  require(!src.empty(), ErrorCode::EmptyInput, where + ": no rows");
  ContrastiveBatch b;
  b.sources = Matrix::from_rows(src);
  b.targets = Matrix::from_rows(tgt);
  if (any_guide) {
    for (std::size_t i = 0; i < gs.size(); ++i)
      require(!gs[i].empty() && !gt[i].empty(), ErrorCode::FormatError,
              where + ": guide embeddings must be given on every row or none");
    b.guide_sources = Matrix::from_rows(gs);
    b.guide_targets = Matrix::from_rows(gt);
  }
  if (any_hn) b.set_hard_negatives(hn);
  b.langs = std::move(langs);
  b.validate();
  return b;
}

inline DistillBatch parse_distill_jsonl(const std::string& text, const std::string& where = "batch") {
  std::vector<std::vector<double>> xs, xt, yt;
  std::vector<LangTag> tags;
  detail::for_each_jsonl(text, where, [&](const json& j, const std::string& at) {
    StrictObject o(j, at);
    xs.push_back(detail::vec_field(o, "x_s", true, at));
    xt.push_back(detail::vec_field(o, "x_t", true, at));
    yt.push_back(detail::vec_field(o, "y_t", true, at));
    LangTag t;
    std::string cls = "foundational";
    o.get("lang", t.language_id);
    o.get("class", cls);
    o.get("en_src", t.is_english_source);
    t.lang_class = lang_class_from_string(cls);
    tags.push_back(t);
    o.finish();
  });
  require(!xs.empty(), ErrorCode::EmptyInput, where + ": no rows");
  DistillBatch b{Matrix::from_rows(xs), Matrix::from_rows(xt), Matrix::from_rows(yt), std::move(tags)};
  b.validate();
  return b;
}

// ---------------------------------------------------------------- reports

inline json to_json(const RetrievalReport& r) {
  json mis = json::array();
  for (auto [q, c] : r.mispaired) mis.push_back({q, c});
  return {{"error_rate_percent", r.error_rate_percent}, {"queries", r.queries}, {"pool_size", r.pool_size},
          {"mispaired", mis}};
}

inline json to_json(const EvalMetrics& m) {
  json j{{"xsim_foundational", m.xsim_foundational},
         {"xsimpp_foundational", m.xsimpp_foundational},
         {"decode_error_foundational", m.decode_error_foundational},
         {"decode_nll_foundational", m.decode_nll_foundational}};
  j["xsim_new"] = m.xsim_new ? json(*m.xsim_new) : json(nullptr);
  j["xsimpp_new"] = m.xsimpp_new ? json(*m.xsimpp_new) : json(nullptr);
  return j;
}

inline json to_json(const StageReport& r) {
  json j{{"stage", r.stage},
         {"steps", r.loss_trace.size()},
         {"final_loss", r.loss_trace.empty() ? json(nullptr) : json(r.loss_trace.back())},
         {"before", to_json(r.before)},
         {"after", to_json(r.after)},
         {"preservation_delta", r.preservation_delta},
         {"decode_preservation_delta", r.decode_preservation_delta},
         {"decode_nll_delta", r.decode_nll_delta}};
  j["teacher_drift"] = r.teacher_drift ? json(*r.teacher_drift) : json(nullptr);
  return j;
}

inline std::string loss_trace_csv(const std::vector<double>& trace) {
  std::string s = "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, trace[i]);
    s += buf;
  }
  return s;
}

inline json snippets_to_json(const std::vector<Snippet>& snippets, std::string_view source) {
  json a = json::array();
  for (const Snippet& s : snippets)
    a.push_back({{"start", s.start},
                 {"end", s.end},
                 {"type", to_string(s.type)},
                 {"text", std::string(source.substr(s.start, s.end - s.start))}});
  return a;
}

}  // namespace oek
