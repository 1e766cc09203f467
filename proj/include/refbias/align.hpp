#pragma once

#include <optional>
#include <vector>

#include "refbias/token.hpp"

namespace refbias {

// Minimum-cost word alignment between a source and a rewrite.
// target_of[i] is the aligned target index of source token i, or nullopt.
// Injective on aligned values. Cost = sum of token Levenshtein distances
// over aligned pairs + character length of every unaligned token (both
// sides).
struct WordAlignment {
  std::vector<std::optional<std::size_t>> target_of;
  std::vector<std::optional<std::size_t>> source_of;
  double cost = 0;
};

WordAlignment align_words(const TokenSequence& source, const TokenSequence& target);

// Source tokens altered or unaligned, plus unaligned target tokens.
std::size_t word_change(const TokenSequence& source, const TokenSequence& target);
std::size_t word_change(const TokenSequence& source, const TokenSequence& target,
                        const WordAlignment& alignment);

// Spearman rho between source positions of aligned pairs and their target
// positions; nullopt with fewer than 2 aligned pairs.
std::optional<double> order_correlation(const TokenSequence& source,
                                        const TokenSequence& target);

// Sentence segments delimited by terminal punctuation tokens (. ! ?).
std::size_t segment_count(const TokenSequence& seq);

struct SplitConcatCounts {
  std::size_t splits = 0;
  std::size_t concats = 0;
};

SplitConcatCounts split_concat_counts(const std::vector<TokenSequence>& sources,
                                      const std::vector<TokenSequence>& targets);

// True iff c and c_prime change exactly the same set of source positions
// (a position counts as changed when unaligned or aligned to a different
// token).
bool exact_index_match(const TokenSequence& source, const TokenSequence& c,
                       const TokenSequence& c_prime);

// The set of changed source indices under the minimum-cost alignment.
std::vector<bool> changed_indices(const TokenSequence& source, const TokenSequence& target);

}  // namespace refbias
