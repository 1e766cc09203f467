#pragma once

#include <vector>

namespace refbias::detail {

struct LpResult {
  bool feasible = false;
  double objective = 0;
  std::vector<double> x;
};

// Minimize c.x subject to A x = b, x >= 0. Dense two-phase simplex with
// Bland's rule; deterministic for fixed input.
LpResult solve_lp(const std::vector<std::vector<double>>& a,
                  const std::vector<double>& b, const std::vector<double>& c);

}  // namespace refbias::detail
