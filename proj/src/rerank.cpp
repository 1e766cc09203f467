#include "refbias/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "refbias/align.hpp"
#include "refbias/stats.hpp"

namespace refbias {

RerankChoice oracle_rerank(const KBestList& kbest, const ReferenceSet& refs,
                           const std::string& measure) {
  if (kbest.k() == 0) throw std::invalid_argument("oracle_rerank: empty k-best list");
  if (!is_known_measure(measure))
    throw std::invalid_argument("unknown measure: " + measure);
  RerankChoice best;
  best.rank = 0;
  best.score = -1;
  for (std::size_t r = 0; r < kbest.candidates.size(); ++r) {
    double score =
        score_sentence(measure, kbest.source, kbest.candidates[r], refs.references);
    if (score > best.score) {  // ties keep the earlier rank
      best.score = score;
      best.rank = r;
      best.candidate = kbest.candidates[r];
    }
  }
  return best;
}

namespace {

struct ProfileAccumulator {
  std::map<std::size_t, double> word_change_counts;
  double rho_sum = 0;
  double rho_defined = 0;
  double splits = 0;
  double concats = 0;
  double word_change_total = 0;
  double samples = 0;

  void add_corpus(const std::vector<const TokenSequence*>& sources,
                  const std::vector<TokenSequence>& chosen) {
    samples += 1;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const WordAlignment a = align_words(*sources[i], chosen[i]);
      const std::size_t wc = word_change(*sources[i], chosen[i], a);
      word_change_counts[wc] += 1;
      word_change_total += static_cast<double>(wc);
      if (auto rho = order_correlation(*sources[i], chosen[i])) {
        rho_sum += *rho;
        rho_defined += 1;
      }
      const std::size_t ss = segment_count(*sources[i]);
      const std::size_t ts = segment_count(chosen[i]);
      if (ts > ss) splits += 1;
      else if (ts < ss) concats += 1;
    }
  }

  UnderCorrectionProfile finish() const {
    UnderCorrectionProfile p;
    const double denom = samples > 0 ? samples : 1;
    for (const auto& [wc, count] : word_change_counts)
      p.word_change_counts[wc] = count / denom;
    p.mean_rho = rho_defined > 0 ? rho_sum / rho_defined : 0;
    p.rho_defined = rho_defined / denom;
    p.splits = splits / denom;
    p.concats = concats / denom;
    return p;
  }

  double mean_word_change(std::size_t sentences) const {
    const double denom = samples > 0 ? samples * static_cast<double>(sentences) : 1;
    return word_change_total / denom;
  }
};

}  // namespace

std::vector<RerankSweepPoint> rerank_sweep(const std::vector<KBestList>& kbests,
                                           const std::vector<ReferenceSet>& ref_pool,
                                           const RerankSweepConfig& config) {
  if (kbests.size() != ref_pool.size())
    throw std::invalid_argument("rerank_sweep: k-best and reference pool sizes differ");
  if (kbests.empty()) throw std::invalid_argument("rerank_sweep: empty input");
  std::size_t pool_size = ref_pool.front().m();
  for (const ReferenceSet& rs : ref_pool) pool_size = std::min(pool_size, rs.m());
  for (int m : config.m_values)
    if (m < 1 || static_cast<std::size_t>(m) > pool_size)
      throw std::invalid_argument("rerank_sweep: M=" + std::to_string(m) +
                                  " exceeds pool size " + std::to_string(pool_size));

  std::vector<const TokenSequence*> sources;
  for (const KBestList& kb : kbests) sources.push_back(&kb.source);

  std::vector<RerankSweepPoint> points;
  std::map<std::size_t, double> m1_counts;
  std::vector<int> ms = config.m_values;

  auto sweep_one = [&](std::optional<int> m) {
    ProfileAccumulator acc;
    const int resamples = m ? config.resamples : 1;
    for (int rs = 0; rs < resamples; ++rs) {
      std::vector<TokenSequence> chosen;
      chosen.reserve(kbests.size());
      for (std::size_t i = 0; i < kbests.size(); ++i) {
        ReferenceSet subset;
        subset.source = ref_pool[i].source;
        if (m) {
          auto rng = derived_rng(config.seed, i,
                                 (static_cast<std::uint64_t>(*m) << 32) |
                                     static_cast<std::uint64_t>(rs));
          std::vector<std::size_t> idx(ref_pool[i].m());
          std::iota(idx.begin(), idx.end(), std::size_t{0});
          for (int d = 0; d < *m; ++d) {
            std::uniform_int_distribution<std::size_t> pick(d, idx.size() - 1);
            std::swap(idx[d], idx[pick(rng)]);
            subset.references.push_back(ref_pool[i].references[idx[d]]);
          }
        } else {
          subset.references = ref_pool[i].references;
        }
        chosen.push_back(oracle_rerank(kbests[i], subset, config.measure).candidate);
      }
      acc.add_corpus(sources, chosen);
    }
    RerankSweepPoint point;
    point.m = m;
    point.profile = acc.finish();
    point.mean_word_change = acc.mean_word_change(kbests.size());
    return point;
  };

  // The M=1 profile anchors the deltas, so it is computed first.
  bool has_m1 = std::find(ms.begin(), ms.end(), 1) != ms.end();
  RerankSweepPoint m1 = sweep_one(1);
  m1_counts = m1.profile.word_change_counts;
  if (has_m1) points.push_back(m1);
  for (int m : ms) {
    if (m == 1) continue;
    points.push_back(sweep_one(m));
  }
  if (config.include_all) points.push_back(sweep_one(std::nullopt));

  for (RerankSweepPoint& point : points) {
    std::map<std::size_t, double> delta = point.profile.word_change_counts;
    for (const auto& [wc, count] : m1_counts) delta[wc] -= count;
    point.word_change_delta = std::move(delta);
  }
  return points;
}

std::map<std::string, double> type_under_correction(
    const std::vector<std::vector<TypedEdits>>& system_edits,
    const std::vector<TypedEdits>& reference_edits) {
  std::map<std::string, double> ref_counts;
  for (const TypedEdits& sent : reference_edits)
    for (const EditSpan& e : sent.edits) ref_counts[e.type_label] += 1;

  std::map<std::string, double> mean_sys_counts;
  if (!system_edits.empty()) {
    for (const auto& system : system_edits) {
      for (const TypedEdits& sent : system)
        for (const EditSpan& e : sent.edits) mean_sys_counts[e.type_label] += 1;
    }
    for (auto& [type, count] : mean_sys_counts)
      count /= static_cast<double>(system_edits.size());
  }

  std::map<std::string, double> ratios;
  for (const auto& [type, ref_count] : ref_counts) {
    if (ref_count <= 0) continue;
    auto it = mean_sys_counts.find(type);
    ratios[type] = (it != mean_sys_counts.end() ? it->second : 0.0) / ref_count;
  }
  return ratios;
}

CorrelationResult type_frequency_correlation(
    const std::map<std::string, double>& ratios,
    const std::map<std::string, double>& type_frequencies) {
  std::vector<double> freq, ratio;
  for (const auto& [type, r] : ratios) {
    auto it = type_frequencies.find(type);
    if (it != type_frequencies.end()) {
      ratio.push_back(r);
      freq.push_back(it->second);
    }
  }
  const std::size_t n = freq.size();
  if (n < 3)
    throw std::invalid_argument("type_frequency_correlation: fewer than 3 overlapping types");
  auto rho_opt = spearman_rho(freq, ratio);
  if (!rho_opt)
    throw std::invalid_argument("type_frequency_correlation: correlation undefined");
  CorrelationResult result;
  result.rho = *rho_opt;

  if (n <= 10) {
    // Exact two-sided permutation test.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::size_t at_least = 0, total = 0;
    std::vector<double> permuted(n);
    do {
      for (std::size_t i = 0; i < n; ++i) permuted[i] = ratio[perm[i]];
      auto r = spearman_rho(freq, permuted);
      if (r && std::fabs(*r) >= std::fabs(result.rho) - 1e-12) ++at_least;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    result.p_value = static_cast<double>(at_least) / static_cast<double>(total);
  } else {
    const double z = result.rho * std::sqrt(static_cast<double>(n - 1));
    result.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(z)));
  }
  return result;
}

std::vector<TypedEdits> load_typed_edits(const std::string& path) {
  std::vector<TypedEdits> out;
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    TypedEdits sent;
    for (const auto& j : rec.at("edits")) {
      EditSpan e;
      e.start = j.at("start").get<std::size_t>();
      e.end = j.at("end").get<std::size_t>();
      if (j.contains("replacement"))
        for (const auto& t : j["replacement"]) e.replacement.push_back(t.get<std::string>());
      if (j.contains("type")) e.type_label = j["type"].get<std::string>();
      sent.edits.push_back(std::move(e));
    }
    out.push_back(std::move(sent));
  }
  return out;
}

}  // namespace refbias
