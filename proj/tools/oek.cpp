// oek: command-line front end. Every subcommand reads files, writes files,
// and leaves a manifest next to what it wrote.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>

#include "CLI11.hpp"
#include "oek/align.hpp"
#include "oek/grad_suite.hpp"
#include "oek/io.hpp"
#include "oek/parallel.hpp"

#ifndef OEK_VERSION
#define OEK_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace oek;

namespace {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s.push_back(hex[md[i] >> 4]);
    s.push_back(hex[md[i] & 15]);
  }
  return s;
}

// Collects everything a command writes. All paths resolve under root, and
// the manifest lists each file with its digest.
class RunManifest {
 public:
  RunManifest(fs::path root, fs::path manifest) : root_(std::move(root)), manifest_(std::move(manifest)) {
    fs::create_directories(root_);
  }

  static RunManifest for_dir(const fs::path& dir) { return {dir, dir / "manifest.json"}; }

  static RunManifest for_file(const fs::path& file) {
    const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
    return {dir, dir / (file.filename().string() + ".manifest.json")};
  }

  void write(const std::string& name, const std::string& bytes) {
    const fs::path p = root_ / name;
    write_file(p.string(), bytes);
    outputs_.push_back({name, sha256_hex(bytes)});
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void set_config(const json& effective) { config_hash_ = sha256_hex(effective.dump()); }
  void set_seed(std::uint64_t s) { seed_ = s; }

  void finish(const std::vector<std::string>& argv) const {
    json outs = json::array();
    for (const auto& [name, digest] : outputs_) outs.push_back({{"path", name}, {"sha256", digest}});
    json m{{"tool", "oek"}, {"version", OEK_VERSION}, {"command_line", argv}};
    m["config_sha256"] = config_hash_.empty() ? json(nullptr) : json(config_hash_);
    m["seed"] = seed_ ? json(*seed_) : json(nullptr);
    m["outputs"] = outs;
    write_file(manifest_.string(), m.dump(2) + "\n");
  }

 private:
  fs::path root_;
  fs::path manifest_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  std::string config_hash_;
  std::optional<std::uint64_t> seed_;
};

json load_json(const std::string& path) { return parse_json(read_file(path), path); }

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(l);
  }
  return lines;
}

std::vector<double> scores_of(const std::vector<Pair>& pairs) {
  std::vector<double> s;
  for (const auto& p : pairs) s.push_back(p.score);
  return s;
}

struct Globals {
  unsigned threads = threads_from_env();
  std::vector<std::string> argv;
};

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string queries, targets, hard_negatives, out;
};

void add_eval(CLI::App& app, Globals& g, std::function<void()>& run) {
  auto* eval = app.add_subcommand("eval", "Retrieval error rates over OEM1 embeddings");
  eval->require_subcommand(1);
  auto a = std::make_shared<EvalArgs>();
  auto* x = eval->add_subcommand("xsim", "xsim, plus xsim++ when hard negatives are given");
  x->add_option("--queries", a->queries, "query embeddings (OEM1)")->required()->check(CLI::ExistingFile);
  x->add_option("--targets", a->targets, "gold targets, row-aligned with queries (OEM1)")
      ->required()
      ->check(CLI::ExistingFile);
  x->add_option("--hard-negatives", a->hard_negatives, "extra candidates (OEM1)")->check(CLI::ExistingFile);
  x->add_option("--out", a->out, "report path (JSON)")->required();
  x->callback([a, &g, &run] {
    run = [a, &g] {
      const Matrix q = read_oem1(a->queries);
      CandidatePool pool{read_oem1(a->targets), std::nullopt};
      json report{{"xsim", to_json(xsim(q, pool, g.threads))}};
      if (!a->hard_negatives.empty()) {
        pool.hard_negatives = read_oem1(a->hard_negatives);
        report["xsimpp"] = to_json(xsimpp(q, pool, g.threads));
      }
      auto m = RunManifest::for_file(a->out);
      m.write_json(fs::path(a->out).filename().string(), report);
      m.finish(g.argv);
    };
  });
}

// ---------------------------------------------------------------- align

struct AlignArgs {
  std::string sim, src, tgt, method = "itermax", out, pred, gold;
  double alpha = 0.9;
  int iters = 2;
};

void add_align(CLI::App& app, Globals& g, std::function<void()>& run) {
  auto* align = app.add_subcommand("align", "Word alignment from token similarities");
  align->require_subcommand(1);
  auto a = std::make_shared<AlignArgs>();

  auto* ex = align->add_subcommand("extract", "Extract links, one Pharaoh line");
  auto* sim = ex->add_option("--sim", a->sim, "similarity matrix, source x target (OEM1)")->check(CLI::ExistingFile);
  auto* src = ex->add_option("--src", a->src, "source token embeddings (OEM1)")->check(CLI::ExistingFile);
  auto* tgt = ex->add_option("--tgt", a->tgt, "target token embeddings (OEM1)")->check(CLI::ExistingFile);
  sim->excludes(src)->excludes(tgt);
  src->needs(tgt);
  tgt->needs(src);
  ex->add_option("--method", a->method)->check(CLI::IsMember({"argmax", "itermax"}))->capture_default_str();
  ex->add_option("--alpha", a->alpha, "itermax discount")->capture_default_str();
  ex->add_option("--iters", a->iters, "itermax rounds")->check(CLI::PositiveNumber)->capture_default_str();
  ex->add_option("--out", a->out, "output path (Pharaoh text)")->required();
  ex->callback([a, &g, &run] {
    run = [a, &g] {
      Matrix s;
      if (!a->sim.empty()) {
        s = read_oem1(a->sim);
      } else {
        require(!a->src.empty(), ErrorCode::InvalidArgument, "give --sim or both --src and --tgt");
        s = scaled_cosine_matrix(read_oem1(a->src), read_oem1(a->tgt), 1.0);
      }
      const AlignmentSet links = a->method == "argmax" ? argmax_align(s) : itermax_align(s, a->alpha, a->iters);
      auto m = RunManifest::for_file(a->out);
      m.set_config(json{{"method", a->method}, {"alpha", a->alpha}, {"iters", a->iters}});
      m.write(fs::path(a->out).filename().string(), to_pharaoh(links) + "\n");
      m.finish(g.argv);
    };
  });

  auto* ae = align->add_subcommand("aer", "Corpus AER of predicted links against gold");
  ae->add_option("--pred", a->pred, "predicted links, one Pharaoh line per sentence")
      ->required()
      ->check(CLI::ExistingFile);
  ae->add_option("--gold", a->gold, "gold links, i-j sure and i?j possible")->required()->check(CLI::ExistingFile);
  ae->add_option("--out", a->out, "report path (JSON)")->required();
  ae->callback([a, &g, &run] {
    run = [a, &g] {
      const auto pred_lines = read_lines(a->pred), gold_lines = read_lines(a->gold);
      require(pred_lines.size() == gold_lines.size(), ErrorCode::InvalidArgument,
              "pred has " + std::to_string(pred_lines.size()) + " lines, gold has " +
                  std::to_string(gold_lines.size()));
      std::vector<AlignmentSet> pred;
      std::vector<GoldAlignment> gold;
      for (std::size_t k = 0; k < pred_lines.size(); ++k) {
        gold.push_back(parse_pharaoh(gold_lines[k]));
        // Predictions may reach past the largest gold index.
        GoldAlignment p = parse_pharaoh(pred_lines[k]);
        pred.push_back(p.possible);
      }
      auto m = RunManifest::for_file(a->out);
      m.write_json(fs::path(a->out).filename().string(), json{{"aer", corpus_aer(pred, gold)}, {"sentences", pred.size()}});
      m.finish(g.argv);
    };
  });
}

// ---------------------------------------------------------------- data

struct DataArgs {
  std::string config, pairs, out, expected_len;
  std::size_t draws = 100000;
  std::uint64_t seed = 17;
  double k = 3.0;
  std::optional<double> cutoff;
  double ratio_lo = 0.25, ratio_hi = 4.0;
};

void add_data(CLI::App& app, Globals& g, std::function<void()>& run) {
  auto* data = app.add_subcommand("data", "Sampling, filtering and synthetic corpora");
  data->require_subcommand(1);
  auto a = std::make_shared<DataArgs>();

  auto* sample = data->add_subcommand("sample", "Draw (source, language) pairs with the two-stage sampler");
  sample->add_option("--config", a->config, "sampler config (JSON)")->required()->check(CLI::ExistingFile);
  sample->add_option("--draws", a->draws)->check(CLI::PositiveNumber)->capture_default_str();
  sample->add_option("--seed", a->seed)->capture_default_str();
  sample->add_option("--out", a->out, "report path (JSON)")->required();
  sample->callback([a, &g, &run] {
    run = [a, &g] {
      const SamplerConfig cfg = sampler_config_from_json(load_json(a->config));
      std::mt19937_64 rng(a->seed);
      std::map<std::pair<std::string, std::string>, std::size_t> hits;
      for (std::size_t i = 0; i < a->draws; ++i) ++hits[two_stage_sample(cfg, rng)];
      json cells = json::array();
      for (const auto& [key, p] : two_stage_probabilities(cfg)) {
        const double freq = static_cast<double>(hits[key]) / static_cast<double>(a->draws);
        cells.push_back({{"source", key.first}, {"lang", key.second}, {"probability", p}, {"frequency", freq}});
      }
      auto m = RunManifest::for_file(a->out);
      m.set_config(to_json(cfg));
      m.set_seed(a->seed);
      m.write_json(fs::path(a->out).filename().string(), json{{"draws", a->draws}, {"cells", cells}});
      m.finish(g.argv);
    };
  });

  auto* thr = data->add_subcommand("threshold", "Score cutoff mu - k*sigma over a pair file");
  thr->add_option("--pairs", a->pairs, "pairs (JSONL)")->required()->check(CLI::ExistingFile);
  thr->add_option("--k", a->k)->check(CLI::NonNegativeNumber)->capture_default_str();
  thr->add_option("--out", a->out, "report path (JSON)")->required();
  thr->callback([a, &g, &run] {
    run = [a, &g] {
      const auto pairs = parse_pairs_jsonl(read_file(a->pairs), a->pairs);
      const auto scores = scores_of(pairs);
      const ThresholdSpec t = score_threshold(scores, a->k);
      auto m = RunManifest::for_file(a->out);
      m.write_json(fs::path(a->out).filename().string(),
                   json{{"mean", t.mean}, {"stddev", t.stddev}, {"k", t.k}, {"cutoff", t.cutoff}});
      m.finish(g.argv);
    };
  });

  auto* filt = data->add_subcommand("filter", "Drop pairs below the score cutoff or outside the length-ratio bounds");
  filt->add_option("--pairs", a->pairs, "pairs (JSONL)")->required()->check(CLI::ExistingFile);
  filt->add_option("--expected-len", a->expected_len, "JSON object: language -> expected length")
      ->required()
      ->check(CLI::ExistingFile);
  auto* cut = filt->add_option("--cutoff", a->cutoff, "fixed score cutoff");
  filt->add_option("--k", a->k, "cutoff from the file's own scores")->excludes(cut)->capture_default_str();
  filt->add_option("--ratio-lo", a->ratio_lo)->capture_default_str();
  filt->add_option("--ratio-hi", a->ratio_hi)->capture_default_str();
  filt->add_option("--out", a->out, "output directory")->required();
  filt->callback([a, &g, &run] {
    run = [a, &g] {
      const auto pairs = parse_pairs_jsonl(read_file(a->pairs), a->pairs);
      std::map<std::string, double> lens;
      try {
        lens = load_json(a->expected_len).get<std::map<std::string, double>>();
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::FormatError, a->expected_len + ": " + e.what());
      }
      const double cutoff = a->cutoff ? *a->cutoff : score_threshold(scores_of(pairs), a->k).cutoff;
      const FilterResult r = filter_pairs(pairs, cutoff, {a->ratio_lo, a->ratio_hi}, lens);
      json rej = json::array();
      for (const auto& x : r.rejected) rej.push_back({{"index", x.index}, {"reason", x.reason}});
      auto m = RunManifest::for_dir(a->out);
      m.write("kept.jsonl", pairs_to_jsonl(r.kept));
      m.write_json("rejected.json", json{{"cutoff", cutoff}, {"rejected", rej}});
      m.finish(g.argv);
    };
  });

  auto* dd = data->add_subcommand("dedup", "Keep-first dedup over both sides of every pair");
  dd->add_option("--pairs", a->pairs, "pairs (JSONL)")->required()->check(CLI::ExistingFile);
  dd->add_option("--out", a->out, "output path (JSONL)")->required();
  dd->callback([a, &g, &run] {
    run = [a, &g] {
      const auto kept = dedup(parse_pairs_jsonl(read_file(a->pairs), a->pairs));
      auto m = RunManifest::for_file(a->out);
      m.write(fs::path(a->out).filename().string(), pairs_to_jsonl(kept));
      m.finish(g.argv);
    };
  });

  auto* syn = data->add_subcommand("synth", "Generate the synthetic multilingual corpus");
  syn->add_option("--config", a->config, "corpus config (JSON); defaults when omitted")->check(CLI::ExistingFile);
  auto* seed = syn->add_option("--seed", a->seed);
  syn->add_option("--out", a->out, "output directory")->required();
  syn->callback([a, &g, &run, seed] {
    run = [a, &g, seed] {
      SynthCorpusConfig cfg = a->config.empty() ? SynthCorpusConfig{} : corpus_config_from_json(load_json(a->config));
      if (seed->count()) cfg.seed = a->seed;
      const SynthCorpus c = synth_corpus(cfg);
      auto m = RunManifest::for_dir(a->out);
      m.set_config(to_json(cfg));
      m.set_seed(cfg.seed);
      m.write("concepts.oemb", encode_oem1(c.concepts));
      json langs = json::array();
      for (std::size_t l = 0; l < c.languages.size(); ++l) {
        const auto& L = c.languages[l];
        m.write("sentences_" + L.name + ".oemb", encode_oem1(c.sentences[l]));
        m.write("hard_negatives_" + L.name + ".oemb", encode_oem1(c.hard_negatives[l]));
        langs.push_back({{"name", L.name}, {"class", to_string(L.lang_class)}, {"noise_sigma", L.noise_sigma}});
      }
      json dirs = json::array();
      for (const auto& d : c.directions) dirs.push_back({c.languages[d.src_lang].name, c.languages[d.tgt_lang].name});
      m.write_json("corpus.json", json{{"config", to_json(cfg)},
                                       {"languages", langs},
                                       {"directions", dirs},
                                       {"train_concepts", c.train_concepts},
                                       {"heldout_concepts", c.heldout_concepts}});
      m.finish(g.argv);
    };
  });
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string stage, config, out;
  std::uint64_t seed = 17;
};

void write_model(RunManifest& m, const ToyModel& model) {
  const ToyEncoder& e = model.encoder;
  for (std::size_t l = 0; l < e.languages.size(); ++l) m.write("encoder_" + e.languages[l] + ".oemb", encode_oem1(e.maps[l]));
  m.write("encoder_bias.oemb", encode_oem1(Matrix::from_rows({e.bias})));
  if (e.unk.size() > 0) m.write("encoder_unk.oemb", encode_oem1(e.unk));
  m.write("decoder_weights.oemb", encode_oem1(model.decoder.weights));
  m.write("decoder_bias.oemb", encode_oem1(Matrix::from_rows({model.decoder.bias})));
}

void add_train(CLI::App& app, Globals& g, std::function<void()>& run) {
  auto* train = app.add_subcommand("train", "Run the toy training stages");
  auto a = std::make_shared<TrainArgs>();
  train->add_option("stage", a->stage, "stage2, stage3 (after stage2) or distill (after both)")
      ->required()
      ->check(CLI::IsMember({"stage2", "stage3", "distill"}));
  train->add_option("--config", a->config, "pipeline config (JSON); defaults when omitted")->check(CLI::ExistingFile);
  train->add_option("--seed", a->seed, "corpus and stage seed")->capture_default_str();
  train->add_option("--out", a->out, "run directory")->required();
  train->callback([a, &g, &run] {
    run = [a, &g] {
      PipelineConfig cfg = a->config.empty() ? PipelineConfig{} : pipeline_config_from_json(load_json(a->config));
      cfg.set_seed(a->seed);
      cfg.set_threads(g.threads);
      const SynthCorpus corpus = synth_corpus(cfg.corpus);
      std::vector<StageResult> done;
      done.push_back(train_stage2(corpus, cfg.loss, cfg.stage2));
      if (a->stage != "stage2") done.push_back(train_stage3(done.back().model, corpus, cfg.loss, cfg.stage3));
      if (a->stage == "distill") done.push_back(distill_stage4(done.back().model, corpus, cfg.distill, cfg.stage4));

      auto m = RunManifest::for_dir(a->out);
      m.set_config(to_json(cfg));
      m.set_seed(a->seed);
      write_model(m, done.back().model);
      json stages = json::array();
      for (const auto& r : done) stages.push_back(to_json(r.report));
      m.write_json("report.json", json{{"config", to_json(cfg)}, {"stages", stages}});
      m.write("loss_trace.csv", loss_trace_csv(done.back().report.loss_trace));
      m.finish(g.argv);
    };
  });
}

// ---------------------------------------------------------------- distill

struct DistillArgs {
  std::string batch, config, out;
};

void add_distill(CLI::App& app, Globals& g, std::function<void()>& run) {
  auto* distill = app.add_subcommand("distill", "Teacher-student objective on a batch");
  distill->require_subcommand(1);
  auto a = std::make_shared<DistillArgs>();
  auto* loss = distill->add_subcommand("loss", "Loss value and gradient for one batch");
  loss->add_option("--batch", a->batch, "batch (JSONL)")->required()->check(CLI::ExistingFile);
  loss->add_option("--config", a->config, "distill config (JSON); preset when omitted")->check(CLI::ExistingFile);
  loss->add_option("--out", a->out, "output directory")->required();
  loss->callback([a, &g, &run] {
    run = [a, &g] {
      const DistillConfig cfg = a->config.empty() ? DistillConfig{} : distill_config_from_json(load_json(a->config));
      const DistillBatch b = parse_distill_jsonl(read_file(a->batch), a->batch);
      const LossOutput out = distill_batch(b, cfg);
      auto m = RunManifest::for_dir(a->out);
      m.set_config(to_json(cfg));
      m.write_json("loss.json", json{{"value", out.value}, {"per_example", out.per_example}});
      m.write("grad_student.oemb", encode_oem1(out.grad(grad::student)));
      m.finish(g.argv);
    };
  });
}

// ---------------------------------------------------------------- flops

struct FlopsArgs {
  std::string config, in = "128:65536:x2", out = "16:1024:x2", csv;
};

void add_flops(CLI::App& app, Globals& g, std::function<void()>& run) {
  auto* flops = app.add_subcommand("flops", "Inference FLOPs cost model");
  flops->require_subcommand(1);
  auto a = std::make_shared<FlopsArgs>();
  auto* cmp = flops->add_subcommand("compare", "Decoder-only vs sentence-level encoder-decoder over a grid");
  cmp->add_option("--config", a->config, "shapes (JSON); built-in shapes when omitted")->check(CLI::ExistingFile);
  cmp->add_option("--in", a->in, "input-token axis lo:hi:xF or lo:hi:+S")->capture_default_str();
  // Here --out is the output-token axis, so the CSV path carries the manifest.
  cmp->add_option("--out", a->out, "output-token axis lo:hi:xF or lo:hi:+S")->capture_default_str();
  cmp->add_option("--csv", a->csv, "table path (CSV)")->required();
  cmp->callback([a, &g, &run] {
    run = [a, &g] {
      const FlopsConfig cfg = a->config.empty() ? FlopsConfig{} : flops_config_from_json(load_json(a->config));
      const WorkloadGrid grid{parse_axis(a->in), parse_axis(a->out), cfg.tokens_per_sentence};
      const RatioTable t = compare(cfg.shapes, grid);
      for (auto col : t.non_monotone_columns())
        std::cerr << "warning: ratio not strictly increasing in input at output=" << col << "\n";
      auto m = RunManifest::for_file(a->csv);
      m.set_config(to_json(cfg));
      m.write(fs::path(a->csv).filename().string(), t.to_csv());
      m.finish(g.argv);
    };
  });
}

// ---------------------------------------------------------------- segment

struct SegmentArgs {
  std::string file, out;
  std::size_t max_size = 100, merge_threshold = 100;
  std::optional<std::size_t> max_expand_depth;
};

void add_segment(CLI::App& app, Globals& g, std::function<void()>& run) {
  auto* seg = app.add_subcommand("segment", "Split a toy-language source file into code and text snippets");
  auto a = std::make_shared<SegmentArgs>();
  seg->add_option("file", a->file, "source file")->required()->check(CLI::ExistingFile);
  seg->add_option("--max-size", a->max_size, "non-whitespace bound per snippet")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  seg->add_option("--merge-threshold", a->merge_threshold)->capture_default_str();
  seg->add_option("--max-expand-depth", a->max_expand_depth, "upward steps per seed; unlimited when omitted");
  seg->add_option("--json", a->out, "snippets path (JSON)")->required();
  seg->callback([a, &g, &run] {
    run = [a, &g] {
      const std::string src = read_file(a->file);
      const auto snips = segment_source(src, {a->max_size, a->max_expand_depth}, a->merge_threshold);
      auto m = RunManifest::for_file(a->out);
      json cfg{{"max_size", a->max_size}, {"merge_threshold", a->merge_threshold}};
      cfg["max_expand_depth"] = a->max_expand_depth ? json(*a->max_expand_depth) : json(nullptr);
      m.set_config(cfg);
      m.write(fs::path(a->out).filename().string(), snippets_to_json(snips, src).dump(2) + "\n");
      m.finish(g.argv);
    };
  });
}

// ---------------------------------------------------------------- gradcheck

struct GradArgs {
  std::size_t instances = 20;
  std::uint64_t seed = 17;
  std::string out;
};

void add_gradcheck(CLI::App& app, Globals& g, std::function<void()>& run, int& status) {
  auto* gc = app.add_subcommand("gradcheck", "Analytic gradients against central differences");
  auto a = std::make_shared<GradArgs>();
  gc->add_option("--instances", a->instances, "random instances per loss")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc->add_option("--seed", a->seed)->capture_default_str();
  gc->add_option("--out", a->out, "report path (JSON)");
  gc->callback([a, &g, &run, &status] {
    run = [a, &g, &status] {
      const auto t0 = std::chrono::steady_clock::now();
      const auto results = certify_all(a->instances, a->seed);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      std::map<std::string, std::tuple<std::size_t, std::size_t, double, double>> by_loss;  // pass, n, rel, abs
      std::vector<std::string> order;
      json rows = json::array();
      for (const auto& r : results) {
        if (!by_loss.contains(r.loss)) order.push_back(r.loss);
        auto& [pass, n, rel, abs] = by_loss[r.loss];
        pass += r.report.pass;
        ++n;
        rel = std::max(rel, r.report.max_rel_err);
        abs = std::max(abs, r.report.max_abs_err);
        rows.push_back({{"loss", r.loss},
                        {"instance", r.instance},
                        {"rows", r.rows},
                        {"dim", r.dim},
                        {"tau", r.tau},
                        {"max_rel_err", r.report.max_rel_err},
                        {"max_abs_err", r.report.max_abs_err},
                        {"pass", r.report.pass}});
      }
      std::printf("%-16s %8s %12s %12s\n", "loss", "passed", "max_rel", "max_abs");
      bool all = true;
      for (const auto& name : order) {
        const auto& [pass, n, rel, abs] = by_loss[name];
        std::printf("%-16s %4zu/%-3zu %12.3e %12.3e\n", name.c_str(), pass, n, rel, abs);
        all = all && pass == n;
      }
      std::printf("%zu checks in %.2f s\n", results.size(), secs);
      if (!a->out.empty()) {
        auto m = RunManifest::for_file(a->out);
        m.set_seed(a->seed);
        m.write_json(fs::path(a->out).filename().string(), json{{"seed", a->seed}, {"instances", rows}});
        m.finish(g.argv);
      }
      if (!all) status = 1;
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  for (int i = 0; i < argc; ++i) g.argv.emplace_back(argv[i]);

  CLI::App app{"oek: embedding losses, retrieval metrics, alignment, data tools and cost models"};
  app.set_version_flag("--version", std::string(OEK_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--threads", g.threads, "worker cap; falls back to OEK_THREADS")->check(CLI::PositiveNumber);

  std::function<void()> run;
  int status = 0;
  add_eval(app, g, run);
  add_align(app, g, run);
  add_data(app, g, run);
  add_train(app, g, run);
  add_distill(app, g, run);
  add_flops(app, g, run);
  add_segment(app, g, run);
  add_gradcheck(app, g, run, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << OEK_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    // A missing subcommand is reported before leftovers, which hides the
    // token the user actually got wrong.
    const auto left = app.remaining();
    if (!left.empty())
      std::cerr << "error: unrecognized " << (left.front().starts_with("-") ? "option" : "subcommand") << " '"
                << left.front() << "'\n\n";
    else
      std::cerr << "error: " << e.what() << "\n\n";
    std::cerr << app.help();
    return 1;
  }

  try {
    if (run) run();
    return status;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
