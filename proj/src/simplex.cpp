#include "dchoice/simplex.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dchoice/errors.hpp"

namespace dchoice {

SimplexResult simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                          const std::vector<double>& c, const SimplexOptions& opt) {
  const std::size_t m = A.size();
  const std::size_t nv = c.size();
  if (b.size() != m) throw std::invalid_argument("simplex: b has wrong length");
  for (const auto& row : A)
    if (row.size() != nv) throw std::invalid_argument("simplex: A row has wrong length");
  for (double v : b)
    if (!(v >= 0.0)) throw std::invalid_argument("simplex: b must be non-negative");

  // tableau rows 0..m-1 are constraints, row m is the objective (reduced costs)
  const std::size_t cols = nv + m;
  const std::size_t width = cols + 1;
  std::vector<double> tab((m + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t j) -> double& { return tab[r * width + j]; };
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < nv; ++j) at(r, j) = A[r][j];
    at(r, nv + r) = 1.0;
    at(r, cols) = b[r];
  }
  for (std::size_t j = 0; j < nv; ++j) at(m, j) = -c[j];
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = nv + r;

  const std::size_t cap = opt.max_iterations ? opt.max_iterations : 50 * (m + cols);
  std::size_t degenerate = 0;
  std::vector<std::size_t> nz;
  SimplexResult res;
  for (;;) {
    const bool bland = degenerate >= opt.degenerate_streak_for_bland;
    std::size_t enter = cols;
    double best = -opt.optimality_tol;
    for (std::size_t j = 0; j < cols; ++j) {
      const double rc = at(m, j);
      if (rc < best) {
        enter = j;
        if (bland) break;
        best = rc;
      }
    }
    if (enter == cols) break;
    if (res.iterations >= cap)
      throw NumericalFailure("simplex: iteration cap " + std::to_string(cap) + " reached");

    std::size_t leave = m;
    double ratio = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double a = at(r, enter);
      if (a <= opt.pivot_tol) continue;
      const double q = at(r, cols) / a;
      if (leave == m || q < ratio - 1e-15 || (q <= ratio + 1e-15 && basis[r] < basis[leave])) {
        leave = r;
        ratio = q;
      }
    }
    if (leave == m) throw NumericalFailure("simplex: problem is unbounded");
    degenerate = ratio <= 1e-15 ? degenerate + 1 : 0;

    const double piv = at(leave, enter);
    nz.clear();
    for (std::size_t j = 0; j < width; ++j) {
      double& v = at(leave, j);
      if (v == 0.0) continue;
      v /= piv;
      nz.push_back(j);
    }
    at(leave, enter) = 1.0;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      double* row = &tab[r * width];
      const double* prow = &tab[leave * width];
      for (auto j : nz) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    basis[leave] = enter;
    ++res.iterations;
  }

  res.x.assign(nv, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < nv) res.x[basis[r]] = std::max(0.0, at(r, cols));
  res.duals.resize(m);
  for (std::size_t r = 0; r < m; ++r) res.duals[r] = std::max(0.0, at(m, nv + r));
  res.objective = at(m, cols);
  return res;
}

}  // namespace dchoice
