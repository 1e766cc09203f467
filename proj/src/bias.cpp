#include "refbias/bias.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "refbias/corpus.hpp"
#include "refbias/measures.hpp"

namespace refbias {

namespace {

struct Item {
  double p = 0;
  std::size_t entry = 0;
  std::size_t index = 0;
};

// Expands histogram entries into individual corrections; multiplicities
// are rounded up so fractional LP output still yields at least one item.
std::vector<Item> expand_items(const CorrectionHistogram& h, bool require_integral) {
  std::vector<Item> items;
  for (std::size_t e = 0; e < h.entries.size(); ++e) {
    const double m = h.entries[e].m;
    if (require_integral && std::fabs(m - std::round(m)) > 1e-9)
      throw std::invalid_argument("histogram multiplicities must be integral here");
    const auto count = static_cast<std::size_t>(std::max(1.0, std::round(m)));
    for (std::size_t i = 0; i < count; ++i)
      items.push_back(Item{h.entries[e].p, e, i});
  }
  return items;
}

double total_weight(const std::vector<Item>& items) {
  double w = 0;
  for (const Item& it : items) w += it.p;
  return w;
}

std::size_t draw_item(const std::vector<Item>& items, double weight, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, weight);
  double u = unif(rng);
  for (std::size_t i = 0; i < items.size(); ++i) {
    u -= items[i].p;
    if (u <= 0) return i;
  }
  return items.size() - 1;
}

}  // namespace

double coverage_with_replacement(const CorrectionHistogram& h, int m) {
  if (m < 1) throw std::invalid_argument("coverage: M must be >= 1");
  double cov = 0;
  for (const HistogramEntry& e : h.entries)
    cov += e.m * e.p * (1.0 - std::pow(1.0 - e.p, m));
  return cov;
}

double coverage_without_replacement(const CorrectionHistogram& h, int m,
                                    int mc_draws, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("coverage: M must be >= 1");
  std::vector<Item> items = expand_items(h, /*require_integral=*/true);
  const std::size_t k = items.size();
  if (static_cast<std::size_t>(m) >= k) return 1.0;
  const double weight = total_weight(items);

  if (k <= 12) {
    // Subset DP over draw prefixes: f[mask] is the probability the first
    // |mask| distinct draws are exactly `mask`.
    const std::size_t full = std::size_t{1} << k;
    std::vector<double> f(full, 0.0), mass(full, 0.0);
    f[0] = 1.0;
    for (std::size_t mask = 1; mask < full; ++mask) {
      double msum = 0;
      for (std::size_t i = 0; i < k; ++i)
        if (mask & (std::size_t{1} << i)) msum += items[i].p / weight;
      mass[mask] = msum;
    }
    double cov = 0;
    for (std::size_t mask = 1; mask < full; ++mask) {
      const int bits = std::popcount(mask);
      if (bits > m) continue;
      double prob = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        if (!(mask & bit)) continue;
        const std::size_t prev = mask ^ bit;
        if (f[prev] > 0)
          prob += f[prev] * (items[i].p / weight) / (1.0 - mass[prev]);
      }
      f[mask] = prob;
      if (bits == m) cov += prob * mass[mask];
    }
    return cov;
  }

  auto rng = derived_rng(seed, 0x77697468u, static_cast<std::uint64_t>(m));
  std::vector<char> taken(k);
  double cov_sum = 0;
  for (int d = 0; d < mc_draws; ++d) {
    std::fill(taken.begin(), taken.end(), 0);
    double remaining = weight;
    double covered = 0;
    for (int draw = 0; draw < m; ++draw) {
      std::uniform_real_distribution<double> unif(0.0, remaining);
      double u = unif(rng);
      std::size_t pick = k;
      for (std::size_t i = 0; i < k; ++i) {
        if (taken[i]) continue;
        u -= items[i].p;
        if (u <= 0) {
          pick = i;
          break;
        }
      }
      if (pick == k) {
        for (std::size_t i = k; i-- > 0;)
          if (!taken[i]) { pick = i; break; }
      }
      taken[pick] = 1;
      covered += items[pick].p;
      remaining -= items[pick].p;
    }
    cov_sum += covered / weight;
  }
  return cov_sum / mc_draws;
}

namespace {

double mc_coverage(const CorrectionHistogram& h, int m, const BiasCurveConfig& config,
                   std::size_t sentence_index) {
  std::vector<Item> items =
      expand_items(h, config.sampling == Sampling::WithoutReplacement);
  const std::size_t k = items.size();
  const double weight = total_weight(items);
  auto rng = derived_rng(config.seed, sentence_index, static_cast<std::uint64_t>(m));
  std::vector<char> in_set(k);
  double sum = 0;
  for (int s = 0; s < config.mc_samples; ++s) {
    std::fill(in_set.begin(), in_set.end(), 0);
    double covered = 0;
    if (config.sampling == Sampling::WithReplacement) {
      for (int d = 0; d < m; ++d) {
        std::size_t pick = draw_item(items, weight, rng);
        if (!in_set[pick]) {
          in_set[pick] = 1;
          covered += items[pick].p / weight;
        }
      }
    } else {
      double remaining = weight;
      const int draws = std::min<int>(m, static_cast<int>(k));
      for (int d = 0; d < draws; ++d) {
        std::uniform_real_distribution<double> unif(0.0, remaining);
        double u = unif(rng);
        std::size_t pick = k;
        for (std::size_t i = 0; i < k; ++i) {
          if (in_set[i]) continue;
          u -= items[i].p;
          if (u <= 0) {
            pick = i;
            break;
          }
        }
        if (pick == k) {
          for (std::size_t i = k; i-- > 0;)
            if (!in_set[i]) { pick = i; break; }
        }
        in_set[pick] = 1;
        covered += items[pick].p / weight;
        remaining -= items[pick].p;
      }
    }
    if (config.estimator == CoverageEstimator::Mass) {
      sum += covered;
    } else {
      std::size_t y = draw_item(items, weight, rng);
      sum += in_set[y] ? 1.0 : 0.0;
    }
  }
  return sum / config.mc_samples;
}

}  // namespace

BiasCurve bias_curve(const std::vector<CorrectionHistogram>& hists,
                     const BiasCurveConfig& config) {
  if (hists.empty()) throw std::invalid_argument("bias_curve: no histograms");
  if (config.m_min < 1 || config.m_max < config.m_min)
    throw std::invalid_argument("bias_curve: bad M range");
  BiasCurve curve;
  curve.mode = config.mode;
  curve.sampling = config.sampling;
  curve.estimator = config.estimator;
  curve.mc_samples = config.mc_samples;
  curve.level = config.level;
  const double scale = config.p_true * config.p_frac;
  for (int m = config.m_min; m <= config.m_max; ++m) {
    std::vector<double> cov(hists.size());
    for (std::size_t i = 0; i < hists.size(); ++i) {
      if (config.mode == CurveMode::Analytic) {
        cov[i] = config.sampling == Sampling::WithReplacement
                     ? coverage_with_replacement(hists[i], m)
                     : coverage_without_replacement(
                           hists[i], m, 10000,
                           derived_rng(config.seed, i, static_cast<std::uint64_t>(m))());
      } else {
        cov[i] = mc_coverage(hists[i], m, config, i);
      }
    }
    BiasPoint point;
    point.m = m;
    const double mean_cov = mean(cov);
    point.bias = scale * (1.0 - mean_cov);
    point.expected = 1.0 - point.bias;
    if (hists.size() >= 2) {
      Interval ci = bca_interval(cov, mean, 1000, config.level,
                                 derived_rng(config.seed, 0xb00c5u, m)());
      point.ci_low = 1.0 - scale * (1.0 - ci.low);
      point.ci_high = 1.0 - scale * (1.0 - ci.high);
    } else {
      point.ci_low = point.ci_high = point.expected;
    }
    curve.points.push_back(point);
  }
  return curve;
}

std::vector<double> accuracy_distribution(const std::vector<CorrectionHistogram>& hists,
                                          int m) {
  std::vector<double> probs;
  probs.reserve(hists.size());
  for (const CorrectionHistogram& h : hists)
    probs.push_back(coverage_with_replacement(h, m));
  return poisson_binomial_pmf(probs);
}

namespace {

struct SentenceItems {
  const SentenceDistribution* sentence = nullptr;
  std::vector<Item> items;
  double weight = 0;
  bool labeled = true;
};

TokenSequence item_tokens(const SentenceItems& si, std::size_t pick) {
  const Item& it = si.items[pick];
  const HistogramEntry& entry = si.sentence->histogram.entries[it.entry];
  if (!entry.values.empty())
    return tokenize(entry.values[it.index % entry.values.size()]);
  // Abstract correction identity for measures that only test equality.
  TokenSequence t;
  t.tokens.push_back("corr" + std::to_string(it.entry) + "_" + std::to_string(it.index));
  t.raw = t.tokens.back();
  return t;
}

SimulationResult run_simulation(const std::vector<SentenceDistribution>& sentences,
                                const SimulationConfig& config, bool lucky) {
  if (sentences.empty()) throw std::invalid_argument("simulation: no sentences");
  if (!is_known_measure(config.measure))
    throw std::invalid_argument("unknown measure: " + config.measure);
  if (lucky && config.measure != "sari" && config.measure != "max-sari")
    throw std::invalid_argument("lucky-perfect simulation is defined for sari/max-sari only");
  if (config.n_cor > config.n)
    throw std::invalid_argument("simulation: n_cor exceeds n");
  if (config.iterations < 1) throw std::invalid_argument("simulation: iterations < 1");

  std::vector<SentenceItems> pool(sentences.size());
  const bool needs_strings = config.measure != "acc";
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    pool[i].sentence = &sentences[i];
    pool[i].items = expand_items(sentences[i].histogram, false);
    pool[i].weight = total_weight(pool[i].items);
    for (const HistogramEntry& e : sentences[i].histogram.entries)
      if (e.values.empty()) pool[i].labeled = false;
    if (needs_strings && !pool[i].labeled)
      throw std::invalid_argument(
          "measure '" + config.measure + "' needs labeled histogram entries");
  }

  SimulationResult result;
  result.measure = config.measure;
  result.m = config.m;
  std::uniform_int_distribution<std::size_t> pick_sentence(0, sentences.size() - 1);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);

  for (int it = 0; it < config.iterations; ++it) {
    auto rng = derived_rng(config.seed, static_cast<std::uint64_t>(it));
    ParallelCorpus corpus;
    std::vector<TokenSequence> outputs;
    corpus.entries.reserve(config.n);
    outputs.reserve(config.n);
    for (std::size_t s = 0; s < config.n; ++s) {
      const std::size_t idx = pick_sentence(rng);
      const SentenceItems& si = pool[idx];
      bool identity = s < config.n_cor;
      if (!identity && config.p_frac < 1.0 && unif01(rng) >= config.p_frac)
        identity = true;
      ReferenceSet entry;
      entry.source = si.sentence->source;
      TokenSequence output;
      if (identity) {
        entry.references.assign(static_cast<std::size_t>(config.m), entry.source);
        output = entry.source;
      } else {
        for (int r = 0; r < config.m; ++r)
          entry.references.push_back(item_tokens(si, draw_item(si.items, si.weight, rng)));
        if (lucky) {
          std::uniform_int_distribution<std::size_t> pick_ref(0, entry.references.size() - 1);
          output = entry.references[pick_ref(rng)];
        } else if (config.p_true < 1.0 && unif01(rng) >= config.p_true) {
          // An invalid correction: the source with a token no reference uses.
          output = entry.source;
          output.tokens.push_back("unkunk");
          output.raw = output.joined();
        } else {
          output = item_tokens(si, draw_item(si.items, si.weight, rng));
        }
      }
      corpus.entries.push_back(std::move(entry));
      outputs.push_back(std::move(output));
    }
    result.iteration_scores.push_back(
        score_corpus(config.measure, corpus, outputs).corpus_score);
  }
  result.score = mean(result.iteration_scores);
  result.ci = bca_from_replicates(result.iteration_scores, result.score,
                                  result.iteration_scores, config.level);
  return result;
}

}  // namespace

SimulationResult simulate_perfect(const std::vector<SentenceDistribution>& sentences,
                                  const SimulationConfig& config) {
  return run_simulation(sentences, config, false);
}

SimulationResult simulate_lucky_perfect(const std::vector<SentenceDistribution>& sentences,
                                        const SimulationConfig& config) {
  return run_simulation(sentences, config, true);
}

std::vector<SentenceDistribution> load_sentence_distributions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open file: " + path);
  std::vector<SentenceDistribution> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    SentenceDistribution sd;
    try {
      sd.histogram = histogram_from_json_line(line);
      const nlohmann::json rec = nlohmann::json::parse(line);
      if (rec.contains("source")) sd.source = tokenize(rec["source"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(sd));
  }
  return out;
}

IncentiveDecision incentive_condition(const IncentiveParams& params) {
  for (double p : {params.p_detect, params.p_correct, params.p_coverage})
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("incentive_condition: probability outside [0,1]");
  if (params.alpha < 0)
    throw std::invalid_argument("incentive_condition: alpha must be non-negative");
  const double reward = params.p_correct * params.p_coverage;
  IncentiveDecision d;
  d.margin = reward - (1.0 - reward) * params.alpha - (1.0 - params.p_detect);
  d.should_correct = d.margin > 0;
  return d;
}

}  // namespace refbias
