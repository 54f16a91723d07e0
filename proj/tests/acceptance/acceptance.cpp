// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Reference implementations below are written from the definitions and
// share no code with the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oek/align.hpp"
#include "oek/grad_suite.hpp"
#include "oek/io.hpp"

using namespace oek;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] C%-2d %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.flat()[k] - b.flat()[k]));
  return m;
}

Matrix gaussian(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (double& v : m.flat()) v = n(rng);
  return m;
}

std::size_t pick(std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// ---------------------------------------------------------------- references

double cos_ref(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) ab += a[k] * b[k], aa += a[k] * a[k], bb += b[k] * b[k];
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

double xsim_ref(const Matrix& q, const Matrix& t, const Matrix* h) {
  std::size_t errors = 0;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    std::size_t best = 0;
    double best_c = -2;
    std::size_t idx = 0;
    for (const Matrix* m : {&t, h}) {
      if (!m) continue;
      for (std::size_t j = 0; j < m->rows(); ++j, ++idx) {
        const double c = cos_ref(q.row(i), m->row(j));
        if (c > best_c) best_c = c, best = idx;
      }
    }
    errors += best != i;
  }
  return 100.0 * static_cast<double>(errors) / static_cast<double>(q.rows());
}

bool mutual_best(const Matrix& s, std::size_t i, std::size_t j) {
  for (std::size_t l = 0; l < s.cols(); ++l)
    if (s(i, l) > s(i, j) || (s(i, l) == s(i, j) && l < j)) return false;
  for (std::size_t l = 0; l < s.rows(); ++l)
    if (s(l, j) > s(i, j) || (s(l, j) == s(i, j) && l < i)) return false;
  return true;
}

std::set<Link> argmax_ref(const Matrix& s) {
  std::set<Link> out;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j)
      if (mutual_best(s, i, j)) out.insert({i, j});
  return out;
}

std::set<Link> itermax_ref(const Matrix& s, double alpha, int iterations) {
  std::set<Link> links = argmax_ref(s);
  for (int it = 1; it < iterations; ++it) {
    std::set<std::size_t> rows, cols;
    for (const auto& l : links) rows.insert(l.first), cols.insert(l.second);
    if (rows.size() == s.rows() || cols.size() == s.cols()) break;
    Matrix d(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = 0; j < s.cols(); ++j)
        d(i, j) = s(i, j) * std::min(1.0, alpha * ((rows.count(i) ? 0 : 1) + (cols.count(j) ? 0 : 1)));
    const std::size_t before = links.size();
    for (const auto& l : argmax_ref(d))
      if (!(rows.count(l.first) && cols.count(l.second))) links.insert(l);
    if (links.size() == before) break;
  }
  return links;
}

double aer_ref(const AlignmentSet& a, const AlignmentSet& sure, const AlignmentSet& poss) {
  double as = 0, ap = 0;
  for (std::size_t i = 0; i < a.n_src; ++i)
    for (std::size_t j = 0; j < a.n_tgt; ++j) {
      const bool in_a = a.contains(i, j);
      as += in_a && sure.contains(i, j);
      ap += in_a && poss.contains(i, j);
    }
  const double denom = static_cast<double>(a.size() + sure.size());
  return denom == 0 ? 0.0 : 1.0 - (as + ap) / denom;
}

std::vector<Pair> dedup_ref(const std::vector<Pair>& in) {
  std::vector<Pair> out;
  for (const Pair& p : in) {
    bool clash = false;
    for (const Pair& q : out)
      for (const std::string* k : {&q.src_key, &q.tgt_key}) clash = clash || *k == p.src_key || *k == p.tgt_key;
    if (!clash) out.push_back(p);
  }
  return out;
}

std::vector<double> weights_ref(const std::vector<double>& n, double beta) {
  double total = 0;
  for (double v : n) total += v;
  std::vector<double> p;
  double z = 0;
  for (double v : n) {
    p.push_back(std::pow(v / total, beta));
    z += p.back();
  }
  for (double& v : p) v /= z;
  return p;
}

// ---------------------------------------------------------------- criteria

void gradient_certification() {
  const auto t0 = Clock::now();
  GradSuiteOptions o;  // rows <= 8, dim <= 16, token tau <= 50, rtol 1e-5, atol 1e-8
  const auto results = certify_all(20, 17, o);
  const double secs = seconds_since(t0);
  std::map<std::string, std::size_t> passed, total;
  for (const auto& r : results) passed[r.loss] += r.report.pass, ++total[r.loss];
  bool ok = secs < 60.0 && results.size() == 100;
  std::string detail;
  for (const auto& [loss, n] : total) {
    ok = ok && passed[loss] == n && n == 20;
    detail += fmt("%s %zu/%zu, ", loss.c_str(), passed[loss], n);
  }
  report(1, "gradient certification", ok, detail + fmt("%.2f s (limit 60 s)", secs));
}

void reduction_identities() {
  std::mt19937_64 rng(17);
  double split_gap = 0, distill_gap = 0, xsim_gap = 0;
  std::size_t itermax_bad = 0;
  for (int t = 0; t < 100; ++t) {
    // split_softmax at gamma 0 is the in-batch loss alone.
    const std::size_t n = pick(2, 8, rng), d = pick(2, 16, rng);
    ContrastiveBatch b = detail::random_contrastive(n, d, true, rng);
    LossConfig cfg = detail::random_loss_config(1.0 + 19.0 * unit(rng), rng);
    cfg.gamma = 0.0;
    const LossOutput a = split_softmax(b, cfg), c = infonce_margin(b, cfg);
    split_gap = std::max(split_gap, std::abs(a.value - c.value));
    for (const auto& key : {grad::sources, grad::targets}) split_gap = std::max(split_gap, max_abs_diff(a.grad(key), c.grad(key)));
    if (a.grads.count(grad::hard_negatives)) {
      const Matrix& h = a.grad(grad::hard_negatives);
      split_gap = std::max(split_gap, max_abs_diff(h, Matrix(h.rows(), h.cols())));
    }

    // Itermax with a single round is plain mutual argmax.
    Matrix s(pick(1, 50, rng), pick(1, 50, rng));
    for (double& v : s.flat()) v = t % 2 ? unit(rng) : static_cast<double>(pick(0, 3, rng));
    itermax_bad += itermax_align(s, 0.5 + 0.5 * unit(rng), 1).links != argmax_align(s).links;

    // Distillation with both contrastive weights off is weighted MSE.
    DistillBatch db{gaussian(n, d, rng), gaussian(n, d, rng), gaussian(n, d, rng), {}};
    DistillConfig dc;
    dc.foundational.lambda_st = dc.foundational.lambda_ts = 0.0;
    dc.new_lang.lambda_st = dc.new_lang.lambda_ts = 0.0;
    dc.foundational.lambda_mse = 0.1 + unit(rng);
    dc.new_lang.lambda_mse = 0.1 + unit(rng);
    for (std::size_t i = 0; i < n; ++i) {
      LangTag tag;
      tag.lang_class = unit(rng) < 0.5 ? LangClass::Foundational : LangClass::New;
      tag.is_english_source = tag.lang_class == LangClass::Foundational && unit(rng) < 0.3;
      db.tags.push_back(tag);
    }
    const LossOutput got = distill_batch(db, dc);
    double want = 0;
    Matrix want_grad(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      const bool is_new = db.tags[i].lang_class == LangClass::New;
      const double lam = is_new ? dc.new_lang.lambda_mse : dc.foundational.lambda_mse;
      for (std::size_t k = 0; k < d; ++k) {
        const double xt = db.teacher_sources(i, k), yt = db.teacher_targets(i, k);
        const double z = is_new ? yt : db.tags[i].is_english_source ? xt : (xt + yt) / 2;
        const double diff = db.student_sources(i, k) - z;
        want += lam * diff * diff / static_cast<double>(n);
        want_grad(i, k) = 2 * lam * diff / static_cast<double>(n);
      }
    }
    distill_gap = std::max({distill_gap, std::abs(got.value - want), max_abs_diff(got.grad(grad::student), want_grad)});

    // Hard negatives orthogonal to every query never win a retrieval.
    const std::size_t m = pick(1, 50, rng), half = pick(2, 8, rng);
    Matrix q(m, 2 * half), tg(m, 2 * half), h(pick(1, 50, rng), 2 * half);
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < half; ++k) q(i, k) = nd(rng), tg(i, k) = q(i, k) + 0.3 * nd(rng);
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t k = half; k < 2 * half; ++k) h(i, k) = nd(rng);
    xsim_gap = std::max(xsim_gap, std::abs(xsimpp(q, {tg, h}).error_rate_percent -
                                           xsim(q, {tg, std::nullopt}).error_rate_percent));
  }
  const bool ok = split_gap <= 1e-12 && itermax_bad == 0 && distill_gap <= 1e-12 && xsim_gap <= 1e-12;
  report(2, "reduction identities", ok,
         fmt("split(g=0)-infonce %.1e, itermax(1)!=argmax %zu/100, distill-mse %.1e, xsim++-xsim %.1e (tol 1e-12)",
             split_gap, itermax_bad, distill_gap, xsim_gap));
}

void constant_fidelity() {
  const std::string loss = to_json(LossConfig{}).dump();
  const std::string distill = to_json(DistillConfig{}).dump();
  const bool ok =
      loss == R"({"schema":"oek.loss/1","tau":100.0,"margin":0.3,"radius":0.5,"alpha":0.05,"beta":1.0,"gamma":0.8,)"
              R"("hard_negatives":5})" &&
      distill == R"({"schema":"oek.distill/1",)"
                 R"("foundational":{"lambda_mse":0.5,"lambda_st":1.0,"lambda_ts":0.5,"tau":10.0,"p_unk":0.25},)"
                 R"("new":{"lambda_mse":0.1,"lambda_st":1.0,"lambda_ts":0.0,"tau":60.0,"p_unk":0.5}})";
  report(3, "constant fidelity", ok, loss + " " + distill);
}

void oracle_equivalence() {
  std::mt19937_64 rng(17);
  std::map<std::string, int> bad;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = pick(1, 50, rng), d = pick(2, 16, rng);
    const Matrix q = gaussian(n, d, rng), tg = gaussian(n, d, rng), h = gaussian(pick(1, 50, rng), d, rng);
    bad["xsim"] += xsim(q, {tg, std::nullopt}).error_rate_percent != xsim_ref(q, tg, nullptr);
    bad["xsim++"] += xsimpp(q, {tg, h}).error_rate_percent != xsim_ref(q, tg, &h);

    Matrix s(pick(1, 50, rng), pick(1, 50, rng));
    for (double& v : s.flat()) v = t % 3 == 0 ? static_cast<double>(pick(0, 3, rng)) / 4 : unit(rng);
    bad["argmax"] += argmax_align(s).links != argmax_ref(s);
    const double alpha = 0.5 + 0.5 * unit(rng);
    const int iters = static_cast<int>(pick(1, 4, rng));
    bad["itermax"] += itermax_align(s, alpha, iters).links != itermax_ref(s, alpha, iters);

    AlignmentSet a{{}, s.rows(), s.cols()}, sure = a, poss = a;
    for (std::size_t k = 0, links = pick(0, 60, rng); k < links; ++k) {
      const std::size_t i = pick(0, s.rows() - 1, rng), j = pick(0, s.cols() - 1, rng);
      const double u = unit(rng);
      if (u < 0.4) a.add(i, j);
      if (u > 0.2 && u < 0.6) sure.add(i, j);
      if (u > 0.2) poss.add(i, j);
    }
    bad["AER"] += aer(a, {sure, poss}) != aer_ref(a, sure, poss);

    std::vector<Pair> pairs;
    const std::size_t vocab = pick(2, 60, rng);
    for (std::size_t i = 0, m = pick(1, 50, rng); i < m; ++i)
      pairs.push_back({"k" + std::to_string(pick(0, vocab, rng)), "k" + std::to_string(pick(0, vocab, rng)), 1.0, 1, 1,
                       "a", "b"});
    bad["dedup"] += dedup(pairs) != dedup_ref(pairs);

    std::vector<double> counts(pick(1, 50, rng));
    for (double& c : counts) c = static_cast<double>(pick(1, 100000, rng));
    const double beta = 2.0 * unit(rng);
    bad["sampling_weights"] += sampling_weights(counts, beta) != weights_ref(counts, beta);
  }
  bool ok = true;
  std::string detail;
  for (const auto& [name, b] : bad) {
    ok = ok && b == 0;
    detail += fmt("%s %d/100, ", name.c_str(), 100 - b);
  }
  report(4, "oracle equivalence", ok, detail + "exact");
}

struct SeedRun {
  SynthCorpus corpus;
  StageResult s2, s3;
};

SeedRun stages_2_and_3(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.set_seed(seed);
  SeedRun r{synth_corpus(cfg.corpus), {}, {}};
  r.s2 = train_stage2(r.corpus, cfg.loss, cfg.stage2);
  r.s3 = train_stage3(r.s2.model, r.corpus, cfg.loss, cfg.stage3);
  return r;
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[1];
}

}  // namespace

int main() {
  std::printf("acceptance run\n");
  gradient_certification();
  reduction_identities();
  constant_fidelity();
  oracle_equivalence();

  // Seed 17 feeds criteria 5 and 7; seeds 17-19 feed criterion 6.
  std::vector<SeedRun> runs;
  std::vector<double> seconds;
  for (std::uint64_t seed : {17u, 18u, 19u}) {
    const auto t0 = Clock::now();
    runs.push_back(stages_2_and_3(seed));
    seconds.push_back(seconds_since(t0));
  }

  // Criterion 7 compares against the seed-17 stage-4 run; it prints after 6.
  std::function<void()> c5_c7;
  {
    const auto t0 = Clock::now();
    const PipelineConfig cfg;
    const StageResult s4 = distill_stage4(runs[0].s3.model, runs[0].corpus, cfg.distill, cfg.stage4);
    const double secs = seconds[0] + seconds_since(t0);
    const double xnew = s4.report.after.xsim_new.value_or(INFINITY);
    const double delta = s4.report.preservation_delta;
    report(5, "preservation", xnew <= 10.0 && delta <= 1.0 && secs < 300.0,
           fmt("seed 17: new-language xsim %.3f%% (<= 10), foundational xsim %.3f -> %.3f, delta %+.3f (<= 1.0), "
               "%.1f s (limit 300 s)",
               xnew, s4.report.before.xsim_foundational, s4.report.after.xsim_foundational, delta, secs));

    c5_c7 = [&runs, s4, cfg] {
      DistillConfig no_mse = cfg.distill;
      no_mse.foundational.lambda_mse = no_mse.new_lang.lambda_mse = 0.0;
      const StageResult ab = distill_stage4(runs[0].s3.model, runs[0].corpus, no_mse, cfg.stage4);
      const double base = s4.report.decode_nll_delta, without = ab.report.decode_nll_delta;
      report(7, "loss-weight ablation", base > 0 ? without >= 2.0 * base : without > 0,
             fmt("foundational decode-NLL delta: preset %.5f, no MSE %.5f (ratio %.2f, need >= 2); "
                 "xsim delta %+.3f vs %+.3f; teacher drift %.3f vs %.3f",
                 base, without, without / base, s4.report.preservation_delta, ab.report.preservation_delta,
                 s4.report.teacher_drift.value_or(NAN), ab.report.teacher_drift.value_or(NAN)));
    };
  }

  {
    std::vector<double> pp2, pp3, x2, x3;
    std::string per_seed;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto& a = runs[k].s2.report.after;
      const auto& b = runs[k].s3.report.after;
      pp2.push_back(a.xsimpp_foundational), pp3.push_back(b.xsimpp_foundational);
      x2.push_back(a.xsim_foundational), x3.push_back(b.xsim_foundational);
      per_seed += fmt("seed %zu xsim++ %.2f->%.2f xsim %.2f->%.2f; ", 17 + k, a.xsimpp_foundational,
                      b.xsimpp_foundational, a.xsim_foundational, b.xsim_foundational);
    }
    const double mpp2 = median3(pp2), mpp3 = median3(pp3), dx = std::abs(median3(x3) - median3(x2));
    report(6, "hard-negative ablation", mpp3 < mpp2 && dx <= 2.0,
           per_seed + fmt("median xsim++ %.2f -> %.2f (strictly lower), median xsim change %.2f (<= 2)", mpp2, mpp3, dx));
  }

  c5_c7();

  {
    const ComparisonShapes shapes;
    const WorkloadGrid grid{parse_axis("128:65536:x2"), parse_axis("16:1024:x2"), 20.0};
    const RatioTable t = compare(shapes, grid);
    const bool monotone = t.non_monotone_columns().empty();
    bool independent = true;
    for (std::size_t i = 0; i < grid.input_tokens.size(); ++i) {
      const auto ref = encdec_flops(shapes.encoder, shapes.encdec_decoder, grid.input_tokens[i], 1, 20.0,
                                    shapes.sentence_encoder);
      for (std::size_t o = 0; o < grid.output_tokens.size(); ++o) {
        const auto f = encdec_flops(shapes.encoder, shapes.encdec_decoder, grid.input_tokens[i],
                                    grid.output_tokens[o], 20.0, shapes.sentence_encoder);
        independent = independent && f.sentence_encoder == ref.sentence_encoder && f.encoder == ref.encoder &&
                      t.at(i, o).encdec_encoder_side == t.at(i, 0).encdec_encoder_side;
      }
    }
    double lo = INFINITY, hi = -INFINITY;
    std::size_t cells = 0;
    for (const auto& c : t.cells)
      if (c.input_tokens >= 8192 && c.output_tokens <= 512) lo = std::min(lo, c.ratio), hi = std::max(hi, c.ratio), ++cells;
    report(8, "FLOPs claims", monotone && independent && cells > 0 && lo >= 1.5 && hi <= 10.0,
           fmt("strictly increasing in input: %s, encoder side independent of output: %s, "
               "ratio in [%.2f, %.2f] over %zu cells (need within [1.5, 10])",
               monotone ? "yes" : "no", independent ? "yes" : "no", lo, hi, cells));
  }

  {
    const fs::path corpus = fs::path(OEK_DATA_DIR) / "codeseg";
    std::size_t files = 0, coverage_bad = 0, bound_bad = 0, unstable = 0, goldens = 0, golden_bad = 0;
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(corpus))
      if (e.path().extension() == ".toy") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      ++files;
      const std::string src = read_file(p.string());
      const std::string first = snippets_to_json(segment_source(src, {}, 100), src).dump();
      for (int run = 0; run < 2; ++run) unstable += snippets_to_json(segment_source(src, {}, 100), src).dump() != first;
      const auto snips = segment_source(src, {}, 100);
      std::vector<int> owner(src.size(), 0);
      for (const auto& s : snips) {
        for (std::size_t i = s.start; i < s.end; ++i) ++owner[i];
        std::size_t nonws = 0;
        for (std::size_t i = s.start; i < s.end; ++i) nonws += !std::isspace(static_cast<unsigned char>(src[i]));
        if (nonws > 100) {
          // Allowed only for one unsplittable token: no whitespace inside the trimmed text.
          std::string_view body(src.data() + s.start, s.end - s.start);
          const auto b = body.find_first_not_of(" \t\r\n"), e = body.find_last_not_of(" \t\r\n");
          const std::string_view core = body.substr(b, e - b + 1);
          const bool quoted = core.size() >= 2 && core.front() == '"' && core.back() == '"' &&
                              core.substr(1, core.size() - 2).find('"') == std::string_view::npos;
          const bool comment = core.starts_with("//") && core.find('\n') == std::string_view::npos;
          const bool token = core.find_first_of(" \t\r\n") == std::string_view::npos;
          bound_bad += !(quoted || comment || token);
        }
      }
      for (std::size_t i = 0; i < src.size(); ++i)
        coverage_bad += !std::isspace(static_cast<unsigned char>(src[i])) && owner[i] != 1;
      const fs::path g = corpus / "golden" / (p.stem().string() + ".json");
      if (fs::exists(g)) {
        ++goldens;
        const json gj = json::parse(read_file(g.string()));
        const auto got = segment_source(src, {gj.at("max_size").get<std::size_t>(), std::nullopt},
                                        gj.at("merge_threshold").get<std::size_t>());
        golden_bad += snippets_to_json(got, src) != gj.at("snippets");
      }
    }
    report(9, "code segmentation",
           files == 25 && coverage_bad == 0 && bound_bad == 0 && unstable == 0 && goldens == 5 && golden_bad == 0,
           fmt("%zu files, coverage violations %zu, size-bound violations %zu, unstable reruns %zu, "
               "golden %zu/%zu",
               files, coverage_bad, bound_bad, unstable, goldens - golden_bad, goldens));
  }

  {
    SamplerConfig cfg;
    cfg.counts["web"] = {{"eng", 500000}, {"fra", 80000}, {"swh", 3000}, {"quy", 40}};
    cfg.counts["bible"] = {{"eng", 30000}, {"swh", 30000}, {"quy", 29000}};
    cfg.counts["mined"] = {{"fra", 250000}, {"quy", 700}};
    std::mt19937_64 rng(17);
    const std::size_t draws = 100000;
    std::map<std::pair<std::string, std::string>, std::size_t> hits;
    for (std::size_t i = 0; i < draws; ++i) ++hits[two_stage_sample(cfg, rng)];
    // Analytic product distribution from the reference weights.
    std::vector<double> totals;
    for (const auto& [src, langs] : cfg.counts) {
      double t = 0;
      for (const auto& [l, n] : langs) t += n;
      totals.push_back(t);
    }
    const auto ps = weights_ref(totals, 0.5);
    double worst = 0;
    std::size_t s = 0;
    for (const auto& [src, langs] : cfg.counts) {
      std::vector<double> n;
      for (const auto& [l, c] : langs) n.push_back(c);
      const auto pl = weights_ref(n, 0.5);
      std::size_t l = 0;
      for (const auto& [lang, c] : langs) {
        const double freq = static_cast<double>(hits[{src, lang}]) / static_cast<double>(draws);
        worst = std::max(worst, std::abs(freq - ps[s] * pl[l++]));
      }
      ++s;
    }
    report(10, "sampler statistics", worst <= 0.01,
           fmt("beta_L = beta_D = %.1f, %zu draws, max |freq - p| = %.5f (<= 0.01)", cfg.beta_lang, draws, worst));
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
