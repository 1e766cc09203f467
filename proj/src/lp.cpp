#include "lp.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace refbias::detail {

namespace {

constexpr double kTol = 1e-9;

struct Tableau {
  std::size_t rows = 0;
  std::size_t cols = 0;  // variable columns, rhs stored separately
  std::vector<std::vector<double>> t;
  std::vector<double> rhs;
  std::vector<std::size_t> basis;

  void pivot(std::size_t pr, std::size_t pc) {
    const double pv = t[pr][pc];
    for (std::size_t j = 0; j < cols; ++j) t[pr][j] /= pv;
    rhs[pr] /= pv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == pr) continue;
      const double f = t[i][pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[pr][j];
      rhs[i] -= f * rhs[pr];
    }
    basis[pr] = pc;
  }

  // Minimizes cost over columns < limit; returns false on unboundedness.
  bool run(const std::vector<double>& cost, std::size_t limit) {
    std::vector<double> reduced(cols);
    while (true) {
      for (std::size_t j = 0; j < cols; ++j) reduced[j] = j < cost.size() ? cost[j] : 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        const double cb = basis[i] < cost.size() ? cost[basis[i]] : 0.0;
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) reduced[j] -= cb * t[i][j];
      }
      // Bland: smallest-index entering column.
      std::size_t entering = limit;
      for (std::size_t j = 0; j < limit; ++j) {
        if (reduced[j] < -kTol) {
          entering = j;
          break;
        }
      }
      if (entering == limit) return true;
      std::size_t leaving = rows;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows; ++i) {
        if (t[i][entering] > kTol) {
          double ratio = rhs[i] / t[i][entering];
          if (ratio < best_ratio - kTol ||
              (ratio < best_ratio + kTol && (leaving == rows || basis[i] < basis[leaving]))) {
            best_ratio = ratio;
            leaving = i;
          }
        }
      }
      if (leaving == rows) return false;  // unbounded
      pivot(leaving, entering);
    }
  }
};

}  // namespace

LpResult solve_lp(const std::vector<std::vector<double>>& a,
                  const std::vector<double>& b, const std::vector<double>& c) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  Tableau tab;
  tab.rows = m;
  tab.cols = n + m;  // artificial column per row
  tab.t.assign(m, std::vector<double>(tab.cols, 0.0));
  tab.rhs.resize(m);
  tab.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i].size() != n) throw std::invalid_argument("solve_lp: ragged constraint matrix");
    const double sign = b[i] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = sign * a[i][j];
    tab.rhs[i] = sign * b[i];
    tab.t[i][n + i] = 1.0;
    tab.basis[i] = n + i;
  }

  // Phase 1: minimize sum of artificials.
  std::vector<double> phase1_cost(tab.cols, 0.0);
  for (std::size_t j = n; j < tab.cols; ++j) phase1_cost[j] = 1.0;
  if (!tab.run(phase1_cost, tab.cols)) return {};
  double infeas = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis[i] >= n) infeas += tab.rhs[i];
  if (infeas > 1e-6) return {};

  // Pivot remaining artificials out on any usable column.
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(tab.t[i][j]) > kTol) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2: artificial columns are excluded from entering.
  std::vector<double> phase2_cost(tab.cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = c[j];
  if (!tab.run(phase2_cost, n)) return {};

  LpResult result;
  result.feasible = true;
  result.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis[i] < n) result.x[tab.basis[i]] = tab.rhs[i];
  for (std::size_t j = 0; j < n; ++j) result.objective += c[j] * result.x[j];
  return result;
}

}  // namespace refbias::detail
