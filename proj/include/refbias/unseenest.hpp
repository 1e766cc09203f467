#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace refbias {

// Multiplicity-of-multiplicities of a sample: counts[r] = number of
// distinct strings observed exactly r times (counts[0] unused).
struct Fingerprint {
  std::vector<std::size_t> counts;
  std::size_t sample_size = 0;

  std::size_t f(std::size_t r) const {
    return r < counts.size() ? counts[r] : 0;
  }
  std::size_t distinct() const;
};

Fingerprint fingerprint(const std::vector<std::string>& samples);

// Estimated histogram of a discrete distribution: entries carry a
// probability value, a (possibly fractional) multiplicity, and, for
// observed values, the strings at that probability.
struct HistogramEntry {
  double p = 0;
  double m = 0;
  std::vector<std::string> values;  // empty for unseen-mass entries
};

struct CorrectionHistogram {
  std::vector<HistogramEntry> entries;
  std::size_t n = 0;         // sample size the estimate was built from
  bool lp_fallback = false;  // set when the LP was infeasible and the
                             // empirical histogram was used instead

  double total_mass() const;
  double support() const;  // sum of multiplicities
  bool is_normalized(double tol = 1e-6) const;
};

struct EstimateConfig {
  double heavy_cutoff = 0.05;  // empirical frequencies at or above this
                               // are trusted directly
  double mesh_min_scale = 50;  // mesh starts at 1/(mesh_min_scale * n)
  double mesh_ratio = 1.05;    // geometric spacing of the rare-region mesh
};

// Histogram of the sampled distribution including unseen mass, by
// fingerprint-matching LP over the rare region. Requires n >= 2.
CorrectionHistogram estimate_histogram(const std::vector<std::string>& samples,
                                       const EstimateConfig& config = {});

// Empirical histogram (observed relative frequencies only).
CorrectionHistogram empirical_histogram(const std::vector<std::string>& samples);

// 1-Wasserstein distance between two mass-1 histograms viewed as
// distributions over probability values. Throws on unnormalized input.
double earthmover(const CorrectionHistogram& h1, const CorrectionHistogram& h2);

struct SummaryRow {
  double gamma = 0;
  double count = 0;  // variants with p > gamma
  double mass = 0;   // their total probability mass
};

std::vector<SummaryRow> summarize(const CorrectionHistogram& h,
                                  const std::vector<double>& thresholds);

// Mean counts/masses across a set of histograms.
std::vector<SummaryRow> summarize(const std::vector<CorrectionHistogram>& hists,
                                  const std::vector<double>& thresholds);

// One-line JSON form: {"n": int, "entries": [{"p": float, "m": float,
// "values": [str, ...]?}, ...]}.
std::string histogram_to_json_line(const CorrectionHistogram& h);
CorrectionHistogram histogram_from_json_line(const std::string& line);

}  // namespace refbias
