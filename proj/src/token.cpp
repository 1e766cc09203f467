#include "refbias/token.hpp"

#include <cctype>

namespace refbias {

namespace {

bool is_alnum_byte(unsigned char c) {
  // Multi-byte UTF-8 sequences count as word characters.
  return std::isalnum(c) || c >= 0x80;
}

// Splits a whitespace-delimited chunk into leading punctuation run,
// core, and trailing punctuation run; punctuation runs are emitted
// character by character so "word.," yields [word, ., ,].
void emit_chunk(const std::string& chunk, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = chunk.size();
  while (begin < end && !is_alnum_byte(chunk[begin])) ++begin;
  while (end > begin && !is_alnum_byte(chunk[end - 1])) --end;
  for (std::size_t i = 0; i < begin; ++i) out.push_back(chunk.substr(i, 1));
  if (begin < end) out.push_back(chunk.substr(begin, end - begin));
  for (std::size_t i = end; i < chunk.size(); ++i) out.push_back(chunk.substr(i, 1));
}

}  // namespace

std::string TokenSequence::joined() const {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

TokenSequence tokenize(const std::string& raw) {
  TokenSequence seq;
  seq.raw = raw;
  std::string chunk;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      if (!chunk.empty()) {
        emit_chunk(chunk, seq.tokens);
        chunk.clear();
      }
    } else {
      chunk.push_back(static_cast<char>(c));
    }
  }
  if (!chunk.empty()) emit_chunk(chunk, seq.tokens);
  return seq;
}

TokenSequence normalize(const TokenSequence& seq, const NormalizationPolicy& policy) {
  if (policy.is_noop()) return seq;
  TokenSequence out;
  out.raw = seq.raw;
  for (const std::string& tok : seq.tokens) {
    std::string t;
    for (unsigned char c : tok) {
      char ch = static_cast<char>(c);
      if (policy.strip_non_alphanumeric && !is_alnum_byte(c)) continue;
      if (policy.lowercase) ch = static_cast<char>(std::tolower(c));
      t.push_back(ch);
    }
    if (!t.empty()) out.tokens.push_back(std::move(t));
  }
  return out;
}

std::string normalized_key(const TokenSequence& seq, const NormalizationPolicy& policy) {
  return normalize(seq, policy).joined();
}

}  // namespace refbias
