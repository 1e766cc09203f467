#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "refbias/token.hpp"

namespace refbias {

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One source sentence with its M >= 1 references. References are a
// multiset: duplicates are kept as distinct samples.
struct ReferenceSet {
  TokenSequence source;
  std::vector<TokenSequence> references;

  std::size_t m() const { return references.size(); }
};

struct ParallelCorpus {
  std::vector<ReferenceSet> entries;
  NormalizationPolicy policy;  // the policy used for the N_cor count

  std::size_t n() const { return entries.size(); }
  // Entries whose source equals (under `policy`) at least one reference.
  std::size_t n_cor() const;
};

// Ranked candidate rewrites, best first.
struct KBestList {
  TokenSequence source;
  std::vector<TokenSequence> candidates;

  std::size_t k() const { return candidates.size(); }
};

// One sentence per line (plain text), aligned by line index across files.
// Throws CorpusError naming the offending file on a line-count mismatch.
ParallelCorpus load_corpus(const std::string& source_path,
                           const std::vector<std::string>& reference_paths,
                           const NormalizationPolicy& policy = {});

// Structured format: one JSON record per line,
// {"source": str, "references": [str, ...]}.
ParallelCorpus load_multi_reference(const std::string& path,
                                    const NormalizationPolicy& policy = {});
void save_multi_reference(const ParallelCorpus& corpus, const std::string& path);

// {"source": str, "candidates": [str, ...]} per line, rank order preserved.
std::vector<KBestList> load_kbest(const std::string& path);

std::vector<TokenSequence> load_sentences(const std::string& path);

// FNV-1a over file bytes, for report provenance.
std::uint64_t file_content_hash(const std::string& path);

}  // namespace refbias
