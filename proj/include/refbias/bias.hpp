#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refbias/stats.hpp"
#include "refbias/token.hpp"
#include "refbias/unseenest.hpp"

namespace refbias {

// Probability that a fresh draw from the histogram's distribution falls in
// a reference set of M independent draws: sum m_j p_j (1 - (1-p_j)^M).
double coverage_with_replacement(const CorrectionHistogram& h, int m);

// Same, with the M references drawn as distinct corrections (successively,
// proportional to remaining mass). Exact subset enumeration for support
// <= 12, Monte Carlo (mc_draws set draws) above. Requires integral
// multiplicities.
double coverage_without_replacement(const CorrectionHistogram& h, int m,
                                    int mc_draws = 10000, std::uint64_t seed = 42);

enum class CurveMode { Analytic, MonteCarlo };
enum class Sampling { WithReplacement, WithoutReplacement };
// Per-sample coverage estimator: covered probability mass of the sampled
// reference set, or a membership indicator for one extra draw.
enum class CoverageEstimator { Mass, Membership };

struct BiasPoint {
  int m = 0;
  double expected = 0;
  double bias = 0;
  double ci_low = 0;
  double ci_high = 0;
};

struct BiasCurve {
  std::vector<BiasPoint> points;
  CurveMode mode = CurveMode::Analytic;
  Sampling sampling = Sampling::WithReplacement;
  CoverageEstimator estimator = CoverageEstimator::Mass;
  int mc_samples = 1000;
  double level = 0.95;
};

struct BiasCurveConfig {
  int m_min = 1;
  int m_max = 20;
  CurveMode mode = CurveMode::Analytic;
  Sampling sampling = Sampling::WithReplacement;
  CoverageEstimator estimator = CoverageEstimator::Mass;
  int mc_samples = 1000;
  std::uint64_t seed = 42;
  double p_true = 1.0;  // the system's true accuracy; scales the bias
  double p_frac = 1.0;  // fraction of sentences needing correction
  double level = 0.95;
};

BiasCurve bias_curve(const std::vector<CorrectionHistogram>& hists,
                     const BiasCurveConfig& config);

// Exact pmf of corpus accuracy K/N where sentence i succeeds with
// probability coverage(h_i, M). Index k holds P(Acc = k/N).
std::vector<double> accuracy_distribution(const std::vector<CorrectionHistogram>& hists,
                                          int m);

// A sentence with its correction distribution, as consumed by the
// perfect-system simulation. String-based measures need labeled entries.
struct SentenceDistribution {
  TokenSequence source;
  CorrectionHistogram histogram;
};

struct SimulationConfig {
  std::size_t n = 1312;      // sentences per replicate
  std::size_t n_cor = 136;   // of which need no correction
  int m = 2;                 // references per sentence
  int iterations = 1000;
  std::uint64_t seed = 42;
  std::string measure = "f05";
  double p_true = 1.0;       // probability the system's output is valid
  double p_frac = 1.0;       // fraction of correction-needing sentences
                             // actually drawn from the distribution
  double level = 0.95;
};

struct SimulationResult {
  std::string measure;
  int m = 0;
  double score = 0;  // mean over iterations
  Interval ci;
  std::vector<double> iteration_scores;
};

// Expected score of an idealized system whose outputs are drawn from the
// human correction distribution, bootstrapped over resampled corpora.
SimulationResult simulate_perfect(const std::vector<SentenceDistribution>& sentences,
                                  const SimulationConfig& config);

// The system outputs one of its own sampled references (sari / max-sari
// only; max-sari is identically 1 for such a system).
SimulationResult simulate_lucky_perfect(const std::vector<SentenceDistribution>& sentences,
                                        const SimulationConfig& config);

// Sentence-distribution files: one histogram JSON record per line, with
// an optional "source" string field.
std::vector<SentenceDistribution> load_sentence_distributions(const std::string& path);

struct IncentiveParams {
  double p_detect = 0;
  double p_correct = 0;
  double p_coverage = 0;
  double alpha = 0;  // penalty/reward ratio of a wrong correction
};

struct IncentiveDecision {
  bool should_correct = false;
  double margin = 0;
};

// Expected-reward margin of correcting versus keeping the phrase;
// alpha = 0 reduces to the plain coverage condition.
IncentiveDecision incentive_condition(const IncentiveParams& params);

}  // namespace refbias
