#pragma once

#include <string>
#include <vector>

namespace refbias {

// A tokenized sentence. Tokens never contain whitespace and are never empty;
// `raw` keeps the original surface string.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::string raw;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }

  // Tokens joined by single spaces.
  std::string joined() const;

  bool operator==(const TokenSequence& o) const { return tokens == o.tokens; }
  bool operator!=(const TokenSequence& o) const { return !(*this == o); }
};

struct NormalizationPolicy {
  bool lowercase = false;
  // Drop tokens with no alphanumeric character and delete non-alphanumeric
  // characters inside the remaining tokens.
  bool strip_non_alphanumeric = false;

  bool is_noop() const { return !lowercase && !strip_non_alphanumeric; }
};

// Whitespace split, then leading/trailing punctuation runs become separate
// tokens. Fixed point on pre-tokenized text ("overseas ." stays two tokens).
TokenSequence tokenize(const std::string& raw);

// Idempotent: normalize(normalize(s, p), p) == normalize(s, p).
TokenSequence normalize(const TokenSequence& seq, const NormalizationPolicy& policy);

// Normalized join, the equality key used by accuracy and N_cor.
std::string normalized_key(const TokenSequence& seq, const NormalizationPolicy& policy);

}  // namespace refbias
