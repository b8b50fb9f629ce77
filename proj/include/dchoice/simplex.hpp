#pragma once

#include <cstddef>
#include <vector>

namespace dchoice {

struct SimplexOptions {
  double pivot_tol = 1e-11;
  double optimality_tol = 1e-12;
  std::size_t max_iterations = 0;  // 0: 50 * (rows + cols)
  std::size_t degenerate_streak_for_bland = 50;
};

struct SimplexResult {
  std::vector<double> x;      // primal, length = columns of A
  std::vector<double> duals;  // one per row, >= 0
  double objective = 0.0;
  std::size_t iterations = 0;
};

/// maximise c.x subject to A x <= b, x >= 0, with b >= 0 so the slack basis is
/// feasible. Dense tableau; Dantzig pricing that falls back to Bland's rule
/// after a run of degenerate pivots. Throws NumericalFailure when the
/// iteration cap is hit or the problem is unbounded.
SimplexResult simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                          const std::vector<double>& c, const SimplexOptions& opt = {});

}  // namespace dchoice
