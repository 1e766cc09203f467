#pragma once

#include <optional>
#include <string>
#include <vector>

#include "refbias/corpus.hpp"
#include "refbias/token.hpp"

namespace refbias {

// A sub-string replacement to the source. start == end is an insertion
// point. Edits of one correction are non-overlapping and sorted by start.
struct EditSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<std::string> replacement;
  std::string type_label;

  bool operator==(const EditSpan& o) const {
    return start == o.start && end == o.end && replacement == o.replacement;
  }
};

// Token-level edit script: maximal non-match runs merged into single spans.
// apply_edits(source, extract_edits(source, target)) == target.
std::vector<EditSpan> extract_edits(const TokenSequence& source,
                                    const TokenSequence& target);
TokenSequence apply_edits(const TokenSequence& source,
                          const std::vector<EditSpan>& edits);

struct ScoreReport {
  std::string measure;
  double corpus_score = 0;
  std::vector<double> sentence_scores;
  // F-type counts; zero elsewhere.
  double tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0;
};

ScoreReport accuracy(const ParallelCorpus& corpus,
                     const std::vector<TokenSequence>& outputs,
                     const NormalizationPolicy& policy);

ScoreReport eim_accuracy(const ParallelCorpus& corpus,
                         const std::vector<TokenSequence>& outputs,
                         const NormalizationPolicy& policy);

ScoreReport f_beta(const ParallelCorpus& corpus,
                   const std::vector<TokenSequence>& outputs, double beta = 0.5);

ScoreReport gleu(const ParallelCorpus& corpus,
                 const std::vector<TokenSequence>& outputs, int max_n = 4);

double gleu_sentence(const TokenSequence& source, const TokenSequence& candidate,
                     const std::vector<TokenSequence>& references, int max_n = 4);

double sari(const TokenSequence& source, const TokenSequence& output,
            const std::vector<TokenSequence>& references, int max_n = 4);

double max_sari(const TokenSequence& source, const TokenSequence& output,
                const std::vector<TokenSequence>& references, int max_n = 4);

// Sentence-level score for any measure name: acc | eim | f05 | gleu |
// sari | max-sari. Throws std::invalid_argument on unknown names.
double score_sentence(const std::string& measure, const TokenSequence& source,
                      const TokenSequence& candidate,
                      const std::vector<TokenSequence>& references,
                      const NormalizationPolicy& policy = {});

// Corpus-level dispatcher for the same names.
ScoreReport score_corpus(const std::string& measure, const ParallelCorpus& corpus,
                         const std::vector<TokenSequence>& outputs,
                         const NormalizationPolicy& policy = {});

bool is_known_measure(const std::string& measure);

}  // namespace refbias
