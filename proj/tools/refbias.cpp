#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "refbias/bias.hpp"
#include "refbias/align.hpp"
#include "refbias/corpus.hpp"
#include "refbias/measures.hpp"
#include "refbias/rerank.hpp"
#include "refbias/unseenest.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
using namespace refbias;

std::string hash_hex(const std::string& path) {
  std::ostringstream os;
  os << std::hex << file_content_hash(path);
  return os.str();
}

// Every report opens with the tool version, the echoed configuration, and
// content hashes of the inputs, so a run is reproducible from its output.
json report_header(const json& config, const std::vector<std::string>& input_paths) {
  json header;
  header["tool"] = "refbias";
  header["version"] = kVersion;
  header["config"] = config;
  json inputs = json::object();
  for (const std::string& p : input_paths) inputs[p] = hash_hex(p);
  header["inputs"] = inputs;
  return header;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

struct CommonOpts {
  std::string out_path = "-";
  std::string csv_path;
  std::uint64_t seed = 42;
  int threads = 1;  // accepted for interface compatibility; results are
                    // required to be independent of it
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool randomized) {
  cmd->add_option("--out", opts.out_path, "Output report path (default stdout)");
  cmd->add_option("--csv", opts.csv_path, "CSV twin output path for curves");
  if (randomized) cmd->add_option("--seed", opts.seed, "Random seed (default 42)");
  const char* env_threads = std::getenv("REFBIAS_THREADS");
  if (env_threads) opts.threads = std::atoi(env_threads);
  cmd->add_option("--threads", opts.threads, "Worker bound; never affects results");
}

NormalizationPolicy policy_flags(CLI::App* cmd) {
  static bool lower = false, strip = false;
  lower = strip = false;
  cmd->add_flag("--lowercase", lower, "Lowercase before comparison");
  cmd->add_flag("--strip-non-alnum", strip, "Drop non-alphanumeric characters and tokens");
  return NormalizationPolicy{};  // read after parse via the statics
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-coverage-bias analysis for reference-based rewriting measures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // ---- score ----
  auto* score_cmd = app.add_subcommand("score", "Score system outputs with a measure");
  std::string sc_measure = "acc", sc_source, sc_hyp, sc_multiref;
  std::vector<std::string> sc_refs;
  double sc_beta = 0.5;
  bool sc_lower = false, sc_strip = false;
  CommonOpts sc_opts;
  score_cmd->add_option("--measure", sc_measure, "acc | eim | f05 | gleu | sari | max-sari")
      ->required();
  score_cmd->add_option("--source", sc_source, "Source sentences, one per line")->required();
  score_cmd->add_option("--refs", sc_refs, "Reference files (parallel, one per line)");
  score_cmd->add_option("--multi-ref", sc_multiref, "Structured multi-reference JSONL file");
  score_cmd->add_option("--hyp", sc_hyp, "System output file")->required();
  score_cmd->add_option("--beta", sc_beta, "Beta for the F measure (default 0.5)");
  score_cmd->add_flag("--lowercase", sc_lower, "Lowercase before comparison");
  score_cmd->add_flag("--strip-non-alnum", sc_strip, "Strip non-alphanumeric content");
  add_common(score_cmd, sc_opts, false);

  // ---- estimate-dist ----
  auto* est_cmd = app.add_subcommand("estimate-dist",
                                     "Estimate per-sentence correction histograms");
  std::string est_multiref, est_out = "-";
  double est_cutoff = 0.05, est_ratio = 1.05, est_scale = 50;
  est_cmd->add_option("--multi-ref", est_multiref, "Multi-reference JSONL input")->required();
  est_cmd->add_option("--out", est_out, "Histogram JSONL output (default stdout)");
  est_cmd->add_option("--heavy-cutoff", est_cutoff, "Empirical-trust frequency cutoff");
  est_cmd->add_option("--mesh-ratio", est_ratio, "Geometric mesh ratio");
  est_cmd->add_option("--mesh-min-scale", est_scale, "Mesh lower bound is 1/(scale*n)");

  // ---- summarize ----
  auto* sum_cmd = app.add_subcommand("summarize", "Variant counts/mass above thresholds");
  std::string sum_hists;
  std::vector<double> sum_gammas{0.0, 0.001, 0.01, 0.1};
  CommonOpts sum_opts;
  sum_cmd->add_option("--hists", sum_hists, "Histogram JSONL input")->required();
  sum_cmd->add_option("--gammas", sum_gammas, "Frequency thresholds");
  add_common(sum_cmd, sum_opts, false);

  // ---- bias-curve ----
  auto* curve_cmd = app.add_subcommand("bias-curve", "Expected measure value and bias vs M");
  std::string bc_hists, bc_mode = "analytic", bc_sampling = "with", bc_estimator = "mass";
  int bc_mmin = 1, bc_mmax = 20, bc_samples = 1000;
  double bc_ptrue = 1.0, bc_pfrac = 1.0;
  CommonOpts bc_opts;
  curve_cmd->add_option("--hists", bc_hists, "Histogram JSONL input")->required();
  curve_cmd->add_option("--m-min", bc_mmin, "Smallest M");
  curve_cmd->add_option("--m-max", bc_mmax, "Largest M");
  curve_cmd->add_option("--mode", bc_mode, "analytic | mc");
  curve_cmd->add_option("--sampling", bc_sampling, "with | without (replacement)");
  curve_cmd->add_option("--estimator", bc_estimator, "mass | membership");
  curve_cmd->add_option("--mc-samples", bc_samples, "Monte Carlo resamples per sentence");
  curve_cmd->add_option("--p-true", bc_ptrue, "True accuracy scale");
  curve_cmd->add_option("--p-frac", bc_pfrac, "Fraction of sentences needing correction");
  add_common(curve_cmd, bc_opts, true);

  // ---- simulate-perfect ----
  auto* sim_cmd = app.add_subcommand("simulate-perfect",
                                     "Bootstrap the score of an idealized perfect system");
  std::string sim_hists, sim_measure = "f05";
  SimulationConfig sim_config;
  bool sim_lucky = false;
  CommonOpts sim_opts;
  sim_cmd->add_option("--hists", sim_hists, "Sentence-distribution JSONL input")->required();
  sim_cmd->add_option("--measure", sim_measure, "acc | eim | f05 | gleu | sari | max-sari");
  sim_cmd->add_option("--n", sim_config.n, "Sentences per replicate (default 1312)");
  sim_cmd->add_option("--n-cor", sim_config.n_cor, "No-correction-needed count (default 136)");
  sim_cmd->add_option("--m", sim_config.m, "References per sentence");
  sim_cmd->add_option("--iterations", sim_config.iterations, "Bootstrap iterations");
  sim_cmd->add_option("--p-true", sim_config.p_true, "True accuracy of the system");
  sim_cmd->add_option("--p-frac", sim_config.p_frac, "Fraction needing correction");
  sim_cmd->add_flag("--lucky", sim_lucky, "Output one of the sampled references instead");
  add_common(sim_cmd, sim_opts, true);

  // ---- rerank-sweep ----
  auto* sweep_cmd = app.add_subcommand("rerank-sweep",
                                       "Oracle-rerank k-best lists for a range of M");
  std::string rs_kbest, rs_refs, rs_measure = "max-sari";
  std::vector<int> rs_mvalues{1, 2, 5};
  int rs_resamples = 1312;
  CommonOpts rs_opts;
  sweep_cmd->add_option("--kbest", rs_kbest, "K-best JSONL input")->required();
  sweep_cmd->add_option("--multi-ref", rs_refs, "Reference pool JSONL input")->required();
  sweep_cmd->add_option("--measure", rs_measure, "Sentence measure for the oracle");
  sweep_cmd->add_option("--m-values", rs_mvalues, "M values to sweep");
  sweep_cmd->add_option("--resamples", rs_resamples, "Reference resamples per M");
  add_common(sweep_cmd, rs_opts, true);

  // ---- under-correction ----
  auto* uc_cmd = app.add_subcommand("under-correction",
                                    "Per-sentence change statistics vs the source");
  std::string uc_source, uc_hyp;
  bool uc_lower = false, uc_strip = false;
  CommonOpts uc_opts;
  uc_cmd->add_option("--source", uc_source, "Source sentences")->required();
  uc_cmd->add_option("--hyp", uc_hyp, "Rewritten sentences")->required();
  uc_cmd->add_flag("--lowercase", uc_lower, "Lowercase before comparison");
  uc_cmd->add_flag("--strip-non-alnum", uc_strip, "Strip non-alphanumeric content");
  add_common(uc_cmd, uc_opts, false);

  // ---- type-ratio ----
  auto* tr_cmd = app.add_subcommand("type-ratio", "Per-type under-correction ratios");
  std::vector<std::string> tr_systems;
  std::string tr_refs, tr_freqs;
  CommonOpts tr_opts;
  tr_cmd->add_option("--system-edits", tr_systems, "Typed-edit JSONL files, one per system")
      ->required();
  tr_cmd->add_option("--reference-edits", tr_refs, "Typed-edit JSONL file for the references")
      ->required();
  tr_cmd->add_option("--frequencies", tr_freqs,
                     "JSON object type->frequency; adds a correlation block");
  add_common(tr_cmd, tr_opts, false);

  // ---- incentive ----
  auto* inc_cmd = app.add_subcommand("incentive", "Correct-vs-abstain incentive margin");
  IncentiveParams inc_params;
  CommonOpts inc_opts;
  inc_cmd->add_option("--p-detect", inc_params.p_detect, "Detection probability")->required();
  inc_cmd->add_option("--p-correct", inc_params.p_correct, "Valid-correction probability")
      ->required();
  inc_cmd->add_option("--p-coverage", inc_params.p_coverage, "Reference-set coverage")
      ->required();
  inc_cmd->add_option("--alpha", inc_params.alpha, "Penalty/reward ratio (default 0)");
  add_common(inc_cmd, inc_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 1;
  }

  try {
    if (score_cmd->parsed()) {
      NormalizationPolicy policy{sc_lower, sc_strip};
      ParallelCorpus corpus;
      std::vector<std::string> inputs{sc_source, sc_hyp};
      if (!sc_multiref.empty()) {
        corpus = load_multi_reference(sc_multiref, policy);
        inputs.push_back(sc_multiref);
      } else {
        corpus = load_corpus(sc_source, sc_refs, policy);
        for (const auto& r : sc_refs) inputs.push_back(r);
      }
      std::vector<TokenSequence> outputs = load_sentences(sc_hyp);
      ScoreReport rep = sc_measure == "f05" && sc_beta != 0.5
                            ? f_beta(corpus, outputs, sc_beta)
                            : score_corpus(sc_measure, corpus, outputs, policy);
      json config{{"subcommand", "score"}, {"measure", sc_measure},
                  {"beta", sc_beta},       {"lowercase", sc_lower},
                  {"strip", sc_strip},     {"source", sc_source},
                  {"hyp", sc_hyp}};
      json out = report_header(config, inputs);
      out["measure"] = rep.measure;
      out["corpus_score"] = rep.corpus_score;
      out["n"] = corpus.n();
      out["n_cor"] = corpus.n_cor();
      if (rep.tp + rep.fp + rep.fn > 0) {
        out["tp"] = rep.tp;
        out["fp"] = rep.fp;
        out["fn"] = rep.fn;
        out["precision"] = rep.precision;
        out["recall"] = rep.recall;
      }
      out["sentence_scores"] = rep.sentence_scores;
      write_text(sc_opts.out_path, out.dump(2) + "\n");
    } else if (est_cmd->parsed()) {
      ParallelCorpus corpus = load_multi_reference(est_multiref);
      EstimateConfig ec{est_cutoff, est_scale, est_ratio};
      std::ostringstream os;
      for (const ReferenceSet& entry : corpus.entries) {
        std::vector<std::string> samples;
        for (const TokenSequence& r : entry.references) samples.push_back(r.joined());
        CorrectionHistogram h = samples.size() >= 2 ? estimate_histogram(samples, ec)
                                                    : empirical_histogram(samples);
        json rec = json::parse(histogram_to_json_line(h));
        rec["source"] = entry.source.joined();
        os << rec.dump() << "\n";
      }
      write_text(est_out, os.str());
    } else if (sum_cmd->parsed()) {
      std::vector<CorrectionHistogram> hists;
      for (const SentenceDistribution& sd : load_sentence_distributions(sum_hists))
        hists.push_back(sd.histogram);
      std::vector<SummaryRow> rows = summarize(hists, sum_gammas);
      json config{{"subcommand", "summarize"}, {"gammas", sum_gammas}, {"hists", sum_hists}};
      json out = report_header(config, {sum_hists});
      out["rows"] = json::array();
      std::ostringstream csv;
      csv << "gamma,variants,mass\n";
      for (const SummaryRow& row : rows) {
        out["rows"].push_back({{"gamma", row.gamma}, {"variants", row.count}, {"mass", row.mass}});
        csv << row.gamma << "," << row.count << "," << row.mass << "\n";
      }
      write_text(sum_opts.out_path, out.dump(2) + "\n");
      if (!sum_opts.csv_path.empty()) write_text(sum_opts.csv_path, csv.str());
    } else if (curve_cmd->parsed()) {
      std::vector<CorrectionHistogram> hists;
      for (const SentenceDistribution& sd : load_sentence_distributions(bc_hists))
        hists.push_back(sd.histogram);
      BiasCurveConfig config;
      config.m_min = bc_mmin;
      config.m_max = bc_mmax;
      config.mode = bc_mode == "mc" ? CurveMode::MonteCarlo : CurveMode::Analytic;
      config.sampling = bc_sampling == "without" ? Sampling::WithoutReplacement
                                                 : Sampling::WithReplacement;
      config.estimator = bc_estimator == "membership" ? CoverageEstimator::Membership
                                                      : CoverageEstimator::Mass;
      config.mc_samples = bc_samples;
      config.seed = bc_opts.seed;
      config.p_true = bc_ptrue;
      config.p_frac = bc_pfrac;
      BiasCurve curve = bias_curve(hists, config);
      json jconfig{{"subcommand", "bias-curve"}, {"hists", bc_hists},
                   {"m_min", bc_mmin},           {"m_max", bc_mmax},
                   {"mode", bc_mode},            {"sampling", bc_sampling},
                   {"estimator", bc_estimator},  {"mc_samples", bc_samples},
                   {"seed", bc_opts.seed},       {"p_true", bc_ptrue},
                   {"p_frac", bc_pfrac}};
      json out = report_header(jconfig, {bc_hists});
      out["points"] = json::array();
      std::ostringstream csv;
      csv << "M,expected,bias,ci_low,ci_high\n";
      for (const BiasPoint& p : curve.points) {
        out["points"].push_back({{"M", p.m},
                                 {"expected", p.expected},
                                 {"bias", p.bias},
                                 {"ci", {p.ci_low, p.ci_high}},
                                 {"mode", bc_mode}});
        csv << p.m << "," << p.expected << "," << p.bias << "," << p.ci_low << ","
            << p.ci_high << "\n";
      }
      write_text(bc_opts.out_path, out.dump(2) + "\n");
      if (!bc_opts.csv_path.empty()) write_text(bc_opts.csv_path, csv.str());
    } else if (sim_cmd->parsed()) {
      std::vector<SentenceDistribution> sentences = load_sentence_distributions(sim_hists);
      sim_config.measure = sim_measure;
      sim_config.seed = sim_opts.seed;
      SimulationResult res = sim_lucky ? simulate_lucky_perfect(sentences, sim_config)
                                       : simulate_perfect(sentences, sim_config);
      json config{{"subcommand", "simulate-perfect"},
                  {"hists", sim_hists},
                  {"measure", sim_measure},
                  {"n", sim_config.n},
                  {"n_cor", sim_config.n_cor},
                  {"m", sim_config.m},
                  {"iterations", sim_config.iterations},
                  {"seed", sim_opts.seed},
                  {"p_true", sim_config.p_true},
                  {"p_frac", sim_config.p_frac},
                  {"lucky", sim_lucky}};
      json out = report_header(config, {sim_hists});
      out["measure"] = res.measure;
      out["M"] = res.m;
      out["expected"] = res.score;
      out["bias"] = 1.0 - res.score;
      out["ci"] = {res.ci.low, res.ci.high};
      out["mode"] = "bootstrap";
      write_text(sim_opts.out_path, out.dump(2) + "\n");
      if (!sim_opts.csv_path.empty()) {
        std::ostringstream csv;
        csv << "M,expected,bias,ci_low,ci_high\n"
            << res.m << "," << res.score << "," << (1.0 - res.score) << "," << res.ci.low
            << "," << res.ci.high << "\n";
        write_text(sim_opts.csv_path, csv.str());
      }
    } else if (sweep_cmd->parsed()) {
      std::vector<KBestList> kbests = load_kbest(rs_kbest);
      ParallelCorpus pool = load_multi_reference(rs_refs);
      RerankSweepConfig config;
      config.m_values = rs_mvalues;
      config.resamples = rs_resamples;
      config.seed = rs_opts.seed;
      config.measure = rs_measure;
      std::vector<RerankSweepPoint> points = rerank_sweep(kbests, pool.entries, config);
      json jconfig{{"subcommand", "rerank-sweep"}, {"kbest", rs_kbest},
                   {"multi_ref", rs_refs},         {"measure", rs_measure},
                   {"m_values", rs_mvalues},       {"resamples", rs_resamples},
                   {"seed", rs_opts.seed}};
      json out = report_header(jconfig, {rs_kbest, rs_refs});
      out["points"] = json::array();
      std::ostringstream csv;
      csv << "M,word_change_bucket,count_delta\n";
      for (const RerankSweepPoint& p : points) {
        json jp;
        jp["M"] = p.m ? json(*p.m) : json("all");
        jp["mean_word_change"] = p.mean_word_change;
        jp["mean_rho"] = p.profile.mean_rho;
        jp["splits"] = p.profile.splits;
        jp["concats"] = p.profile.concats;
        json buckets = json::object();
        for (const auto& [wc, count] : p.profile.word_change_counts)
          buckets[std::to_string(wc)] = count;
        jp["word_change_counts"] = buckets;
        json deltas = json::object();
        for (const auto& [wc, delta] : p.word_change_delta) {
          deltas[std::to_string(wc)] = delta;
          csv << (p.m ? std::to_string(*p.m) : std::string("all")) << "," << wc << ","
              << delta << "\n";
        }
        jp["word_change_delta"] = deltas;
        out["points"].push_back(std::move(jp));
      }
      write_text(rs_opts.out_path, out.dump(2) + "\n");
      if (!rs_opts.csv_path.empty()) write_text(rs_opts.csv_path, csv.str());
    } else if (uc_cmd->parsed()) {
      NormalizationPolicy policy{uc_lower, uc_strip};
      std::vector<TokenSequence> sources = load_sentences(uc_source);
      std::vector<TokenSequence> hyps = load_sentences(uc_hyp);
      if (sources.size() != hyps.size())
        throw CorpusError("line count mismatch between " + uc_source + " and " + uc_hyp);
      std::ostringstream csv;
      csv << "index,word_change,rho,split,concat\n";
      for (std::size_t i = 0; i < sources.size(); ++i) {
        TokenSequence s = normalize(sources[i], policy);
        TokenSequence t = normalize(hyps[i], policy);
        auto rho = order_correlation(s, t);
        std::size_t ss = segment_count(sources[i]);
        std::size_t ts = segment_count(hyps[i]);
        csv << i << "," << word_change(s, t) << ","
            << (rho ? std::to_string(*rho) : std::string("NA")) << "," << (ts > ss ? 1 : 0)
            << "," << (ts < ss ? 1 : 0) << "\n";
      }
      write_text(uc_opts.out_path.empty() || uc_opts.out_path == "-" ? uc_opts.out_path
                                                                     : uc_opts.out_path,
                 csv.str());
      if (!uc_opts.csv_path.empty()) write_text(uc_opts.csv_path, csv.str());
    } else if (tr_cmd->parsed()) {
      std::vector<std::vector<TypedEdits>> systems;
      for (const std::string& path : tr_systems) systems.push_back(load_typed_edits(path));
      std::vector<TypedEdits> refs = load_typed_edits(tr_refs);
      std::map<std::string, double> ratios = type_under_correction(systems, refs);
      json config{{"subcommand", "type-ratio"},
                  {"system_edits", tr_systems},
                  {"reference_edits", tr_refs}};
      std::vector<std::string> inputs = tr_systems;
      inputs.push_back(tr_refs);
      json out = report_header(config, inputs);
      json jratios = json::object();
      for (const auto& [type, ratio] : ratios) jratios[type] = ratio;
      out["ratios"] = jratios;
      if (!tr_freqs.empty()) {
        std::ifstream in(tr_freqs);
        if (!in) throw CorpusError("cannot open file: " + tr_freqs);
        json jf = json::parse(in);
        std::map<std::string, double> freqs;
        for (auto it = jf.begin(); it != jf.end(); ++it) freqs[it.key()] = it.value();
        CorrelationResult corr = type_frequency_correlation(ratios, freqs);
        out["correlation"] = {{"rho", corr.rho}, {"p_value", corr.p_value}};
      }
      write_text(tr_opts.out_path, out.dump(2) + "\n");
      if (!tr_opts.csv_path.empty()) {
        std::ostringstream csv;
        csv << "type,ratio\n";
        for (const auto& [type, ratio] : ratios) csv << type << "," << ratio << "\n";
        write_text(tr_opts.csv_path, csv.str());
      }
    } else if (inc_cmd->parsed()) {
      IncentiveDecision d = incentive_condition(inc_params);
      json config{{"subcommand", "incentive"},
                  {"p_detect", inc_params.p_detect},
                  {"p_correct", inc_params.p_correct},
                  {"p_coverage", inc_params.p_coverage},
                  {"alpha", inc_params.alpha}};
      json out = report_header(config, {});
      out["should_correct"] = d.should_correct;
      out["margin"] = d.margin;
      write_text(inc_opts.out_path, out.dump(2) + "\n");
    }
  } catch (const CorpusError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
