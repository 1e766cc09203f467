#include "refbias/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "refbias/align.hpp"

namespace refbias {

namespace {

void check_arity(const ParallelCorpus& corpus, const std::vector<TokenSequence>& outputs) {
  if (outputs.size() != corpus.n())
    throw std::invalid_argument("output count " + std::to_string(outputs.size()) +
                                " does not match corpus size " + std::to_string(corpus.n()));
}

}  // namespace

std::vector<EditSpan> extract_edits(const TokenSequence& source,
                                    const TokenSequence& target) {
  const auto& s = source.tokens;
  const auto& t = target.tokens;
  const std::size_t n = s.size(), m = t.size();

  // Token-level Levenshtein DP; ties prefer match/substitute, then delete.
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1),
                          d[i - 1][j] + 1, d[i][j - 1] + 1});

  enum class Op { Match, Sub, Del, Ins };
  std::vector<Op> ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1)) {
      ops.push_back(s[i - 1] == t[j - 1] ? Op::Match : Op::Sub);
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ops.push_back(Op::Del);
      --i;
    } else {
      ops.push_back(Op::Ins);
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());

  // Merge maximal non-match runs into single spans.
  std::vector<EditSpan> edits;
  std::size_t si = 0, tj = 0;
  bool in_span = false;
  EditSpan span;
  auto close = [&] {
    if (in_span) {
      span.end = si;
      edits.push_back(span);
      in_span = false;
    }
  };
  for (Op op : ops) {
    if (op == Op::Match) {
      close();
      ++si;
      ++tj;
      continue;
    }
    if (!in_span) {
      in_span = true;
      span = EditSpan{};
      span.start = si;
    }
    switch (op) {
      case Op::Sub:
        span.replacement.push_back(t[tj]);
        ++si;
        ++tj;
        break;
      case Op::Del:
        ++si;
        break;
      case Op::Ins:
        span.replacement.push_back(t[tj]);
        ++tj;
        break;
      default:
        break;
    }
  }
  close();
  return edits;
}

TokenSequence apply_edits(const TokenSequence& source, const std::vector<EditSpan>& edits) {
  TokenSequence out;
  std::size_t pos = 0;
  for (const EditSpan& e : edits) {
    if (e.start < pos || e.end < e.start || e.end > source.size())
      throw std::invalid_argument("apply_edits: overlapping or out-of-range edit");
    for (; pos < e.start; ++pos) out.tokens.push_back(source.tokens[pos]);
    for (const std::string& tok : e.replacement) out.tokens.push_back(tok);
    pos = e.end;
  }
  for (; pos < source.size(); ++pos) out.tokens.push_back(source.tokens[pos]);
  out.raw = out.joined();
  return out;
}

ScoreReport accuracy(const ParallelCorpus& corpus,
                     const std::vector<TokenSequence>& outputs,
                     const NormalizationPolicy& policy) {
  check_arity(corpus, outputs);
  ScoreReport rep;
  rep.measure = "acc";
  for (std::size_t i = 0; i < corpus.n(); ++i) {
    const std::string key = normalized_key(outputs[i], policy);
    bool hit = false;
    for (const TokenSequence& ref : corpus.entries[i].references)
      if (normalized_key(ref, policy) == key) { hit = true; break; }
    rep.sentence_scores.push_back(hit ? 1.0 : 0.0);
  }
  rep.corpus_score = corpus.n() == 0 ? 0.0
                                     : std::accumulate(rep.sentence_scores.begin(),
                                                       rep.sentence_scores.end(), 0.0) /
                                           static_cast<double>(corpus.n());
  return rep;
}

ScoreReport eim_accuracy(const ParallelCorpus& corpus,
                         const std::vector<TokenSequence>& outputs,
                         const NormalizationPolicy& policy) {
  check_arity(corpus, outputs);
  ScoreReport rep;
  rep.measure = "eim";
  for (std::size_t i = 0; i < corpus.n(); ++i) {
    const TokenSequence src = normalize(corpus.entries[i].source, policy);
    const TokenSequence out = normalize(outputs[i], policy);
    bool hit = false;
    for (const TokenSequence& ref : corpus.entries[i].references) {
      if (exact_index_match(src, out, normalize(ref, policy))) { hit = true; break; }
    }
    rep.sentence_scores.push_back(hit ? 1.0 : 0.0);
  }
  rep.corpus_score = corpus.n() == 0 ? 0.0
                                     : std::accumulate(rep.sentence_scores.begin(),
                                                       rep.sentence_scores.end(), 0.0) /
                                           static_cast<double>(corpus.n());
  return rep;
}

namespace {

struct EditCounts {
  double tp = 0, fp = 0, fn = 0;
};

double f_from_counts(const EditCounts& c, double beta) {
  double p = (c.tp + c.fp) > 0 ? c.tp / (c.tp + c.fp) : 1.0;
  double r = (c.tp + c.fn) > 0 ? c.tp / (c.tp + c.fn) : 1.0;
  if (p + r == 0) return 0.0;
  double b2 = beta * beta;
  return (1.0 + b2) * p * r / (b2 * p + r);
}

// Merged replacement of a run of system edits inside [start,end), with the
// kept source tokens in between.
std::vector<std::string> merge_run(const TokenSequence& source,
                                   const std::vector<EditSpan>& sys,
                                   std::size_t first, std::size_t last) {
  std::vector<std::string> repl;
  std::size_t pos = sys[first].start;
  for (std::size_t k = first; k <= last; ++k) {
    for (; pos < sys[k].start; ++pos) repl.push_back(source.tokens[pos]);
    for (const std::string& tok : sys[k].replacement) repl.push_back(tok);
    pos = sys[k].end;
  }
  return repl;
}

EditCounts match_edits(const TokenSequence& source, const std::vector<EditSpan>& sys,
                       const std::vector<EditSpan>& gold) {
  std::vector<bool> sys_used(sys.size(), false);
  std::vector<bool> gold_used(gold.size(), false);
  EditCounts counts;

  for (std::size_t g = 0; g < gold.size(); ++g) {
    for (std::size_t s = 0; s < sys.size(); ++s) {
      if (sys_used[s]) continue;
      if (sys[s] == gold[g]) {
        sys_used[s] = true;
        gold_used[g] = true;
        counts.tp += 1;
        break;
      }
    }
  }

  // Optimistic matching: a gold edit may equal several adjacent system
  // edits merged (with the kept tokens between them).
  for (std::size_t g = 0; g < gold.size(); ++g) {
    if (gold_used[g]) continue;
    for (std::size_t first = 0; first < sys.size(); ++first) {
      if (sys_used[first] || sys[first].start != gold[g].start) continue;
      bool matched = false;
      for (std::size_t last = first + 1; last < sys.size(); ++last) {
        if (sys_used[last] || sys[last].end > gold[g].end) break;
        if (sys[last].end == gold[g].end &&
            merge_run(source, sys, first, last) == gold[g].replacement) {
          for (std::size_t k = first; k <= last; ++k) sys_used[k] = true;
          gold_used[g] = true;
          counts.tp += 1;
          matched = true;
          break;
        }
      }
      if (matched) break;
    }
  }

  for (std::size_t s = 0; s < sys.size(); ++s)
    if (!sys_used[s]) counts.fp += 1;
  for (std::size_t g = 0; g < gold.size(); ++g)
    if (!gold_used[g]) counts.fn += 1;
  return counts;
}

// Per-sentence counts against the reference maximizing the sentence's
// F contribution; ties prefer more TP, then fewer proposed-or-missed edits.
EditCounts best_reference_counts(const TokenSequence& source,
                                 const std::vector<EditSpan>& sys,
                                 const std::vector<TokenSequence>& references,
                                 double beta) {
  EditCounts best;
  double best_f = -1;
  for (const TokenSequence& ref : references) {
    EditCounts c = match_edits(source, sys, extract_edits(source, ref));
    double f = f_from_counts(c, beta);
    if (f > best_f || (f == best_f && (c.tp > best.tp ||
                                       (c.tp == best.tp && c.fp + c.fn < best.fp + best.fn)))) {
      best_f = f;
      best = c;
    }
  }
  return best;
}

}  // namespace

ScoreReport f_beta(const ParallelCorpus& corpus,
                   const std::vector<TokenSequence>& outputs, double beta) {
  check_arity(corpus, outputs);
  if (beta <= 0) throw std::invalid_argument("f_beta: beta must be positive");
  ScoreReport rep;
  rep.measure = "f" + std::to_string(beta);
  EditCounts total;
  for (std::size_t i = 0; i < corpus.n(); ++i) {
    const TokenSequence& src = corpus.entries[i].source;
    std::vector<EditSpan> sys = extract_edits(src, outputs[i]);
    EditCounts c = best_reference_counts(src, sys, corpus.entries[i].references, beta);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    rep.sentence_scores.push_back(f_from_counts(c, beta));
  }
  rep.tp = total.tp;
  rep.fp = total.fp;
  rep.fn = total.fn;
  rep.precision = (total.tp + total.fp) > 0 ? total.tp / (total.tp + total.fp) : 1.0;
  rep.recall = (total.tp + total.fn) > 0 ? total.tp / (total.tp + total.fn) : 1.0;
  rep.corpus_score = f_from_counts(total, beta);
  return rep;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, double>;

NgramCounts ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)] += 1;
  return counts;
}

double overlap(const NgramCounts& a, const NgramCounts& b) {
  double total = 0;
  for (const auto& [gram, count] : a) {
    auto it = b.find(gram);
    if (it != b.end()) total += std::min(count, it->second);
  }
  return total;
}

}  // namespace

double gleu_sentence(const TokenSequence& source, const TokenSequence& candidate,
                     const std::vector<TokenSequence>& references, int max_n) {
  if (max_n < 1) throw std::invalid_argument("gleu: max_n must be >= 1");
  if (candidate.empty()) return 0.0;
  double best = 0.0;
  for (const TokenSequence& ref : references) {
    const int eff_n = std::min<int>(max_n, static_cast<int>(candidate.size()));
    double log_sum = 0.0;
    for (int n = 1; n <= eff_n; ++n) {
      NgramCounts cand = ngrams(candidate.tokens, n);
      NgramCounts refc = ngrams(ref.tokens, n);
      NgramCounts srcc = ngrams(source.tokens, n);
      double denom = static_cast<double>(candidate.size()) - n + 1;
      double ref_overlap = overlap(cand, refc);
      // Source n-grams matched by the candidate beyond what the reference
      // licenses are penalized.
      double penalty = 0;
      for (const auto& [gram, count] : cand) {
        double in_src = 0, in_ref = 0;
        if (auto it = srcc.find(gram); it != srcc.end()) in_src = std::min(count, it->second);
        if (auto it = refc.find(gram); it != refc.end()) in_ref = std::min(count, it->second);
        penalty += std::max(0.0, in_src - in_ref);
      }
      double numer = std::max(0.0, ref_overlap - penalty);
      double p = numer > 0 ? numer / denom : 1.0 / (2.0 * denom);
      log_sum += std::log(p);
    }
    double bp = 1.0;
    if (!ref.empty() && static_cast<double>(ref.size()) > static_cast<double>(candidate.size()))
      bp = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(candidate.size()));
    if (ref.empty()) { best = std::max(best, 0.0); continue; }
    best = std::max(best, bp * std::exp(log_sum / eff_n));
  }
  return best;
}

ScoreReport gleu(const ParallelCorpus& corpus,
                 const std::vector<TokenSequence>& outputs, int max_n) {
  check_arity(corpus, outputs);
  ScoreReport rep;
  rep.measure = "gleu";
  for (std::size_t i = 0; i < corpus.n(); ++i)
    rep.sentence_scores.push_back(gleu_sentence(corpus.entries[i].source, outputs[i],
                                                corpus.entries[i].references, max_n));
  rep.corpus_score = corpus.n() == 0 ? 0.0
                                     : std::accumulate(rep.sentence_scores.begin(),
                                                       rep.sentence_scores.end(), 0.0) /
                                           static_cast<double>(corpus.n());
  return rep;
}

namespace {

double f1(double precision, double recall) {
  if (precision + recall == 0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

// One n-gram order of SARI: keep-F1, delete-precision, add-F1 averaged.
// Reference counts are combined across the M references; source and
// output counts are scaled by M so fractions compare like-for-like.
double sari_ngram(const std::vector<std::string>& src, const std::vector<std::string>& out,
                  const std::vector<const std::vector<std::string>*>& refs, int n) {
  const double num_refs = static_cast<double>(refs.size());
  NgramCounts s = ngrams(src, n);
  NgramCounts c = ngrams(out, n);
  NgramCounts r;
  for (const auto* ref : refs)
    for (const auto& [gram, count] : ngrams(*ref, n)) r[gram] += count;
  for (auto& [gram, count] : s) count *= num_refs;
  for (auto& [gram, count] : c) count *= num_refs;

  auto min_with = [](const NgramCounts& a, const NgramCounts& b) {
    NgramCounts out_counts;
    for (const auto& [gram, count] : a) {
      auto it = b.find(gram);
      if (it != b.end()) {
        double v = std::min(count, it->second);
        if (v > 0) out_counts[gram] = v;
      }
    }
    return out_counts;
  };
  auto minus = [](const NgramCounts& a, const NgramCounts& b) {
    NgramCounts out_counts;
    for (const auto& [gram, count] : a) {
      double v = count;
      auto it = b.find(gram);
      if (it != b.end()) v -= it->second;
      if (v > 0) out_counts[gram] = v;
    }
    return out_counts;
  };
  auto total = [](const NgramCounts& a) {
    double t = 0;
    for (const auto& [gram, count] : a) t += count;
    return t;
  };

  // Keep: n-grams of the source retained by the output vs retained by refs.
  NgramCounts keep_sys = min_with(s, c);
  NgramCounts keep_gold = min_with(s, r);
  double keep_hits = total(min_with(keep_sys, keep_gold));
  double keep_p = total(keep_sys) > 0 ? keep_hits / total(keep_sys) : 1.0;
  double keep_r = total(keep_gold) > 0 ? keep_hits / total(keep_gold) : 1.0;

  // Delete: source n-grams removed; precision only.
  NgramCounts del_sys = minus(s, c);
  NgramCounts del_gold = minus(s, r);
  double del_hits = total(min_with(del_sys, del_gold));
  double del_p = total(del_sys) > 0 ? del_hits / total(del_sys) : 1.0;

  // Add: n-grams absent from the source, set semantics.
  std::set<std::vector<std::string>> add_sys, add_gold;
  for (const auto& [gram, count] : c)
    if (s.find(gram) == s.end()) add_sys.insert(gram);
  for (const auto& [gram, count] : r)
    if (s.find(gram) == s.end()) add_gold.insert(gram);
  double add_hits = 0;
  for (const auto& gram : add_sys)
    if (add_gold.count(gram)) add_hits += 1;
  double add_p = !add_sys.empty() ? add_hits / static_cast<double>(add_sys.size()) : 1.0;
  double add_r = !add_gold.empty() ? add_hits / static_cast<double>(add_gold.size()) : 1.0;

  return (f1(keep_p, keep_r) + del_p + f1(add_p, add_r)) / 3.0;
}

}  // namespace

double sari(const TokenSequence& source, const TokenSequence& output,
            const std::vector<TokenSequence>& references, int max_n) {
  if (references.empty()) throw std::invalid_argument("sari: need at least one reference");
  bool all_refs_empty = true;
  for (const TokenSequence& r : references)
    if (!r.empty()) { all_refs_empty = false; break; }
  if (all_refs_empty && !source.empty()) return 0.0;
  std::vector<const std::vector<std::string>*> refs;
  for (const TokenSequence& r : references) refs.push_back(&r.tokens);
  double total = 0;
  for (int n = 1; n <= max_n; ++n)
    total += sari_ngram(source.tokens, output.tokens, refs, n);
  return total / static_cast<double>(max_n);
}

double max_sari(const TokenSequence& source, const TokenSequence& output,
                const std::vector<TokenSequence>& references, int max_n) {
  if (references.empty()) throw std::invalid_argument("max_sari: need at least one reference");
  double best = 0;
  for (const TokenSequence& ref : references)
    best = std::max(best, sari(source, output, {ref}, max_n));
  return best;
}

bool is_known_measure(const std::string& measure) {
  return measure == "acc" || measure == "eim" || measure == "f05" ||
         measure == "gleu" || measure == "sari" || measure == "max-sari";
}

double score_sentence(const std::string& measure, const TokenSequence& source,
                      const TokenSequence& candidate,
                      const std::vector<TokenSequence>& references,
                      const NormalizationPolicy& policy) {
  if (measure == "acc") {
    const std::string key = normalized_key(candidate, policy);
    for (const TokenSequence& ref : references)
      if (normalized_key(ref, policy) == key) return 1.0;
    return 0.0;
  }
  if (measure == "eim") {
    const TokenSequence src = normalize(source, policy);
    const TokenSequence cand = normalize(candidate, policy);
    for (const TokenSequence& ref : references)
      if (exact_index_match(src, cand, normalize(ref, policy))) return 1.0;
    return 0.0;
  }
  if (measure == "f05") {
    std::vector<EditSpan> sys = extract_edits(source, candidate);
    EditCounts c = best_reference_counts(source, sys, references, 0.5);
    return f_from_counts(c, 0.5);
  }
  if (measure == "gleu") return gleu_sentence(source, candidate, references);
  if (measure == "sari") return sari(source, candidate, references);
  if (measure == "max-sari") return max_sari(source, candidate, references);
  throw std::invalid_argument("unknown measure: " + measure);
}

ScoreReport score_corpus(const std::string& measure, const ParallelCorpus& corpus,
                         const std::vector<TokenSequence>& outputs,
                         const NormalizationPolicy& policy) {
  if (measure == "acc") return accuracy(corpus, outputs, policy);
  if (measure == "eim") return eim_accuracy(corpus, outputs, policy);
  if (measure == "f05") return f_beta(corpus, outputs, 0.5);
  if (measure == "gleu") return gleu(corpus, outputs);
  if (measure == "sari" || measure == "max-sari") {
    check_arity(corpus, outputs);
    ScoreReport rep;
    rep.measure = measure;
    for (std::size_t i = 0; i < corpus.n(); ++i) {
      const auto& e = corpus.entries[i];
      rep.sentence_scores.push_back(measure == "sari"
                                        ? sari(e.source, outputs[i], e.references)
                                        : max_sari(e.source, outputs[i], e.references));
    }
    rep.corpus_score = corpus.n() == 0 ? 0.0
                                       : std::accumulate(rep.sentence_scores.begin(),
                                                         rep.sentence_scores.end(), 0.0) /
                                             static_cast<double>(corpus.n());
    return rep;
  }
  throw std::invalid_argument("unknown measure: " + measure);
}

}  // namespace refbias
