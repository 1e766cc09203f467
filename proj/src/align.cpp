#include "refbias/align.hpp"

#include <algorithm>
#include <limits>

#include "refbias/stats.hpp"

namespace refbias {

namespace {

constexpr double kForbidden = 1e9;

// O(n^3) Kuhn-Munkres for a square cost matrix; returns column of each row.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1), v(n + 1);
  std::vector<int> p(n + 1), way(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double edge_cost(const std::string& a, const std::string& b) {
  return static_cast<double>(levenshtein(a, b));
}

}  // namespace

WordAlignment align_words(const TokenSequence& source, const TokenSequence& target) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  WordAlignment out;
  out.target_of.assign(n, std::nullopt);
  out.source_of.assign(m, std::nullopt);
  if (n == 0 && m == 0) return out;

  // Square matrix with per-token "stay unmatched" slots: slot m+i absorbs
  // source i at its character-length penalty, slot n+j absorbs target j.
  const std::size_t dim = n + m;
  std::vector<std::vector<double>> cost(dim, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      cost[i][j] = edge_cost(source.tokens[i], target.tokens[j]);
    for (std::size_t j = 0; j < n; ++j)
      cost[i][m + j] = (i == j) ? static_cast<double>(source.tokens[i].size()) : kForbidden;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      cost[n + i][j] = (i == j) ? static_cast<double>(target.tokens[i].size()) : kForbidden;
  }

  std::vector<int> row_to_col = hungarian(cost);
  for (std::size_t i = 0; i < n; ++i) {
    int j = row_to_col[i];
    if (j >= 0 && static_cast<std::size_t>(j) < m) out.target_of[i] = static_cast<std::size_t>(j);
  }

  // Cost-preserving uncrossing keeps the output canonical when several
  // matchings are optimal.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!out.target_of[i]) continue;
      for (std::size_t k = i + 1; k < n; ++k) {
        if (!out.target_of[k]) continue;
        std::size_t ji = *out.target_of[i];
        std::size_t jk = *out.target_of[k];
        if (ji <= jk) continue;
        double before = edge_cost(source.tokens[i], target.tokens[ji]) +
                        edge_cost(source.tokens[k], target.tokens[jk]);
        double after = edge_cost(source.tokens[i], target.tokens[jk]) +
                       edge_cost(source.tokens[k], target.tokens[ji]);
        if (after <= before) {
          std::swap(out.target_of[i], out.target_of[k]);
          changed = true;
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (out.target_of[i]) out.source_of[*out.target_of[i]] = i;

  out.cost = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.target_of[i])
      out.cost += edge_cost(source.tokens[i], target.tokens[*out.target_of[i]]);
    else
      out.cost += static_cast<double>(source.tokens[i].size());
  }
  for (std::size_t j = 0; j < m; ++j)
    if (!out.source_of[j]) out.cost += static_cast<double>(target.tokens[j].size());
  return out;
}

std::size_t word_change(const TokenSequence& source, const TokenSequence& target,
                        const WordAlignment& alignment) {
  std::size_t changes = 0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!alignment.target_of[i] ||
        source.tokens[i] != target.tokens[*alignment.target_of[i]])
      ++changes;
  }
  for (std::size_t j = 0; j < target.size(); ++j)
    if (!alignment.source_of[j]) ++changes;
  return changes;
}

std::size_t word_change(const TokenSequence& source, const TokenSequence& target) {
  return word_change(source, target, align_words(source, target));
}

std::optional<double> order_correlation(const TokenSequence& source,
                                        const TokenSequence& target) {
  const WordAlignment a = align_words(source, target);
  std::vector<double> src_pos, tgt_pos;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (a.target_of[i]) {
      src_pos.push_back(static_cast<double>(i));
      tgt_pos.push_back(static_cast<double>(*a.target_of[i]));
    }
  }
  if (src_pos.size() < 2) return std::nullopt;
  return spearman_rho(src_pos, tgt_pos);
}

std::size_t segment_count(const TokenSequence& seq) {
  std::size_t count = 0;
  bool open = false;
  for (const std::string& tok : seq.tokens) {
    if (tok == "." || tok == "!" || tok == "?") {
      ++count;
      open = false;
    } else {
      open = true;
    }
  }
  if (open) ++count;
  return count;
}

SplitConcatCounts split_concat_counts(const std::vector<TokenSequence>& sources,
                                      const std::vector<TokenSequence>& targets) {
  SplitConcatCounts counts;
  for (std::size_t i = 0; i < sources.size() && i < targets.size(); ++i) {
    std::size_t s = segment_count(sources[i]);
    std::size_t t = segment_count(targets[i]);
    if (t > s) ++counts.splits;
    else if (t < s) ++counts.concats;
  }
  return counts;
}

std::vector<bool> changed_indices(const TokenSequence& source, const TokenSequence& target) {
  const WordAlignment a = align_words(source, target);
  std::vector<bool> changed(source.size(), false);
  for (std::size_t i = 0; i < source.size(); ++i)
    changed[i] = !a.target_of[i] || source.tokens[i] != target.tokens[*a.target_of[i]];
  return changed;
}

bool exact_index_match(const TokenSequence& source, const TokenSequence& c,
                       const TokenSequence& c_prime) {
  return changed_indices(source, c) == changed_indices(source, c_prime);
}

}  // namespace refbias
