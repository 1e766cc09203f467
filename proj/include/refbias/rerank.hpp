#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refbias/corpus.hpp"
#include "refbias/measures.hpp"

namespace refbias {

struct RerankChoice {
  std::size_t rank = 0;  // 0-based position in the k-best list
  double score = 0;
  TokenSequence candidate;
};

// Candidate maximizing the sentence measure against the references; ties
// keep the best original rank.
RerankChoice oracle_rerank(const KBestList& kbest, const ReferenceSet& refs,
                           const std::string& measure);

// Under-correction profile of a reranked corpus, averaged over resamples.
struct UnderCorrectionProfile {
  std::map<std::size_t, double> word_change_counts;  // sentences per change count
  double mean_rho = 0;          // over pairs where rho is defined
  double rho_defined = 0;       // how many pairs had >= 2 aligned words
  double splits = 0;
  double concats = 0;
};

struct RerankSweepPoint {
  std::optional<int> m;  // nullopt = the full-pool ("all") condition
  UnderCorrectionProfile profile;
  std::map<std::size_t, double> word_change_delta;  // vs the M=1 profile
  double mean_word_change = 0;
};

struct RerankSweepConfig {
  std::vector<int> m_values;
  int resamples = 1312;
  std::uint64_t seed = 42;
  std::string measure = "max-sari";
  bool include_all = true;
};

// For each M: draw M references without replacement from each sentence's
// pool, rerank, profile the chosen outputs, average over resamples.
std::vector<RerankSweepPoint> rerank_sweep(const std::vector<KBestList>& kbests,
                                           const std::vector<ReferenceSet>& ref_pool,
                                           const RerankSweepConfig& config);

struct TypedEdits {
  std::vector<EditSpan> edits;  // type_label set
};

// Per error type: mean system edit count over systems divided by the
// reference edit count. Types absent from the references are omitted.
std::map<std::string, double> type_under_correction(
    const std::vector<std::vector<TypedEdits>>& system_edits,  // [system][sentence]
    const std::vector<TypedEdits>& reference_edits);

struct CorrelationResult {
  double rho = 0;
  double p_value = 1;
};

// Spearman correlation of type frequency vs under-correction ratio.
// Exact permutation p-value for <= 10 overlapping types, normal
// approximation above. Throws with fewer than 3 overlapping types.
CorrelationResult type_frequency_correlation(
    const std::map<std::string, double>& ratios,
    const std::map<std::string, double>& type_frequencies);

// Typed-edit files: one JSON record per line,
// {"edits": [{"start": i, "end": j, "replacement": [...], "type": str}...]}.
std::vector<TypedEdits> load_typed_edits(const std::string& path);

}  // namespace refbias
