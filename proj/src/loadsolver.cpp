#include "dchoice/loadsolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dchoice/errors.hpp"
#include "dchoice/maxflow.hpp"
#include "dchoice/simplex.hpp"

namespace dchoice {

namespace {

double checked_sum(std::span<const double> rho, std::size_t k) {
  if (rho.size() != k)
    throw std::invalid_argument("demand vector has length " + std::to_string(rho.size()) + ", expected " +
                                std::to_string(k));
  double s = 0.0;
  for (double v : rho) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("demands must be finite and non-negative");
    s += v;
  }
  return s;
}

std::vector<double> loads_of(const AllocationMatrices& m, const std::vector<double>& x) {
  std::vector<double> loads(m.n, 0.0);
  for (std::size_t c = 0; c < m.columns(); ++c)
    for (auto node : m.column_nodes[c]) loads[node] += x[c];
  return loads;
}

void finish(LoadSplit& out, const AllocationMatrices& m) {
  out.node_loads = loads_of(m, out.portions);
  out.max_load = out.node_loads.empty() ? 0.0 : *std::max_element(out.node_loads.begin(), out.node_loads.end());
}

// Scales each object's portions so they sum to its demand exactly.
void normalise_portions(const AllocationMatrices& m, std::span<const double> rho, std::vector<double>& x,
                        double min_ratio) {
  std::vector<double> got(m.k, 0.0);
  for (std::size_t c = 0; c < m.columns(); ++c) got[m.column_owner[c].first] += x[c];
  for (std::size_t c = 0; c < m.columns(); ++c) {
    const auto o = m.column_owner[c].first;
    if (rho[o] == 0.0) {
      x[c] = 0.0;
      continue;
    }
    if (got[o] < rho[o] * min_ratio)
      throw NumericalFailure("object " + std::to_string(o) + " receives " + std::to_string(got[o]) +
                             " of demand " + std::to_string(rho[o]));
    x[c] *= rho[o] / got[o];
  }
}

}  // namespace

LoadSplit min_max_load(const AllocationMatrices& m, std::span<const double> rho) {
  const double sigma = checked_sum(rho, m.k);
  LoadSplit out;
  out.portions.assign(m.columns(), 0.0);
  for (std::size_t c = 0; c < m.columns(); ++c) {
    if (m.column_nodes[c].empty()) throw std::invalid_argument("column " + std::to_string(c) + " has no nodes");
    for (auto node : m.column_nodes[c])
      if (node >= m.n) throw std::invalid_argument("column " + std::to_string(c) + " names node out of range");
  }
  if (sigma == 0.0) {
    finish(out, m);
    return out;
  }

  const double scale = *std::max_element(rho.begin(), rho.end());
  std::vector<std::size_t> obj_row(m.k, SIZE_MAX), node_row(m.n, SIZE_MAX), cols;
  std::size_t rows = 0;
  for (std::size_t c = 0; c < m.columns(); ++c) {
    if (rho[m.column_owner[c].first] == 0.0) continue;
    cols.push_back(c);
    for (auto node : m.column_nodes[c])
      if (node_row[node] == SIZE_MAX) node_row[node] = rows++;
  }
  const std::size_t node_rows = rows;
  for (std::size_t o = 0; o < m.k; ++o)
    if (rho[o] > 0.0) obj_row[o] = rows++;
  for (std::size_t o = 0; o < m.k; ++o)
    if (rho[o] > 0.0 && std::none_of(cols.begin(), cols.end(), [&](std::size_t c) { return m.column_owner[c].first == o; }))
      throw std::invalid_argument("object " + std::to_string(o) + " has demand but no choices");

  const std::size_t nv = cols.size() + 1;
  const std::size_t lam = cols.size();
  std::vector<std::vector<double>> A(rows, std::vector<double>(nv, 0.0));
  std::vector<double> b(rows, 0.0), cvec(nv, 0.0);
  for (std::size_t r = 0; r < node_rows; ++r) b[r] = 1.0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto c = cols[j];
    for (auto node : m.column_nodes[c]) A[node_row[node]][j] = 1.0;
    A[obj_row[m.column_owner[c].first]][j] = -1.0;
  }
  for (std::size_t o = 0; o < m.k; ++o)
    if (obj_row[o] != SIZE_MAX) A[obj_row[o]][lam] = rho[o] / scale;
  cvec[lam] = 1.0;

  const SimplexResult res = simplex_max(A, b, cvec);
  const double lambda = res.objective;
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw NumericalFailure("LP returned non-positive lambda");

  // dual certificate: u (node rows) and w (object rows) must satisfy
  // sum_{i in c} u_i >= w_owner for every column and rho'.w >= 1, sum u = lambda
  const double tol = 1e-8;
  double usum = 0.0, rw = 0.0;
  for (std::size_t r = 0; r < node_rows; ++r) usum += res.duals[r];
  for (std::size_t o = 0; o < m.k; ++o)
    if (obj_row[o] != SIZE_MAX) rw += rho[o] / scale * res.duals[obj_row[o]];
  bool ok = std::abs(usum - lambda) <= tol * std::max(1.0, lambda) && rw >= 1.0 - tol;
  for (std::size_t j = 0; j < cols.size() && ok; ++j) {
    const auto c = cols[j];
    double lhs = 0.0;
    for (auto node : m.column_nodes[c]) lhs += res.duals[node_row[node]];
    ok = lhs - res.duals[obj_row[m.column_owner[c].first]] >= -tol * std::max(1.0, lhs);
  }
  if (!ok) throw NumericalFailure("LP dual certificate check failed");

  const double t = scale / lambda;
  for (std::size_t j = 0; j < cols.size(); ++j) out.portions[cols[j]] = res.x[j] * t;
  normalise_portions(m, rho, out.portions, 1.0 - 1e-7);
  finish(out, m);
  if (out.max_load > t * (1.0 + 1e-9) + 1e-300) throw NumericalFailure("LP split exceeds its optimal value");
  return out;
}

namespace {

// Returns the split and the certified optimum t* = rho(S)/|N(S)|.
std::pair<LoadSplit, double> parametric_replica(const Allocation& a, std::span<const double> rho) {
  if (!a.is_replica()) throw UnsupportedError("min_max_load_replica needs a replica allocation");
  const double sigma = checked_sum(rho, a.k);
  const AllocationMatrices m = to_matrices(a);
  LoadSplit out;
  out.portions.assign(m.columns(), 0.0);
  if (sigma == 0.0) {
    finish(out, m);
    return {out, 0.0};
  }
  const std::size_t src = 0, sink = a.k + a.n + 1;
  MaxFlow g(a.k + a.n + 2);
  std::vector<std::size_t> col_edge(m.columns(), SIZE_MAX), node_edge(a.n);
  std::vector<char> used(a.n, 0);
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t o = 0; o < a.k; ++o)
    if (rho[o] > 0.0) g.add_edge(src, 1 + o, rho[o]);
  for (std::size_t c = 0; c < m.columns(); ++c) {
    const auto o = m.column_owner[c].first;
    if (rho[o] == 0.0) continue;
    const auto node = m.column_nodes[c][0];
    col_edge[c] = g.add_edge(1 + o, 1 + a.k + node, inf);
    used[node] = 1;
  }
  for (std::size_t v = 0; v < a.n; ++v) node_edge[v] = g.add_edge(1 + a.k + v, sink, 0.0);
  const auto nused = static_cast<double>(std::count(used.begin(), used.end(), 1));
  for (std::size_t o = 0; o < a.k; ++o)
    if (rho[o] > 0.0 && a.recovery_sets[o].empty())
      throw std::invalid_argument("object " + std::to_string(o) + " has demand but no choices");

  double t = sigma / nused;
  const double eps = 1e-13 * sigma;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > 4 * a.k + 16) throw NumericalFailure("parametric flow did not converge");
    for (std::size_t v = 0; v < a.n; ++v) g.set_capacity(node_edge[v], used[v] ? t : 0.0);
    const double f = g.run(src, sink, eps * 1e-3);
    if (f >= sigma - 1e-12 * sigma) break;
    const auto side = g.source_side(src, eps * 1e-3);
    double rs = 0.0;
    std::vector<char> hit(a.n, 0);
    std::size_t ns = 0;
    for (std::size_t o = 0; o < a.k; ++o) {
      if (!side[1 + o] || rho[o] == 0.0) continue;
      rs += rho[o];
      for (const auto& set : a.recovery_sets[o])
        if (!hit[set[0]]) {
          hit[set[0]] = 1;
          ++ns;
        }
    }
    if (ns == 0) break;
    const double next = rs / static_cast<double>(ns);
    if (next <= t * (1.0 + 1e-14)) break;
    t = next;
  }
  for (std::size_t c = 0; c < m.columns(); ++c)
    if (col_edge[c] != SIZE_MAX) out.portions[c] = std::max(0.0, g.flow_on(col_edge[c]));
  // rounding can leave an object a hair short; put the remainder on its least loaded node
  std::vector<double> got(a.k, 0.0);
  for (std::size_t c = 0; c < m.columns(); ++c) got[m.column_owner[c].first] += out.portions[c];
  auto loads = loads_of(m, out.portions);
  for (std::size_t c0 = 0; c0 < m.columns();) {
    const auto o = m.column_owner[c0].first;
    std::size_t c1 = c0;
    while (c1 < m.columns() && m.column_owner[c1].first == o) ++c1;
    const double missing = rho[o] - got[o];
    if (missing > 0.0) {
      std::size_t best = c0;
      for (std::size_t c = c0; c < c1; ++c)
        if (loads[m.column_nodes[c][0]] < loads[m.column_nodes[best][0]]) best = c;
      out.portions[best] += missing;
      loads[m.column_nodes[best][0]] += missing;
    } else if (missing < 0.0) {
      for (std::size_t c = c0; c < c1; ++c) out.portions[c] *= rho[o] / got[o];
    }
    c0 = c1;
  }
  finish(out, m);
  if (out.max_load > t * (1.0 + 1e-9)) throw NumericalFailure("parametric flow split exceeds its bound");
  return {out, t};
}

}  // namespace

LoadSplit min_max_load_replica(const Allocation& a, std::span<const double> rho) {
  return parametric_replica(a, rho).first;
}

double min_max_load_flow(const Allocation& a, std::span<const double> rho, double tol) {
  if (!a.is_replica()) throw UnsupportedError("min_max_load_flow needs a replica allocation");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const double sigma = checked_sum(rho, a.k);
  if (sigma == 0.0) return 0.0;
  const std::size_t src = 0, sink = a.k + a.n + 1;
  MaxFlow g(a.k + a.n + 2);
  const double inf = std::numeric_limits<double>::infinity();
  double lo = 0.0;
  for (std::size_t o = 0; o < a.k; ++o) {
    if (rho[o] == 0.0) continue;
    if (a.recovery_sets[o].empty()) throw std::invalid_argument("object with demand but no choices");
    g.add_edge(src, 1 + o, rho[o]);
    for (const auto& set : a.recovery_sets[o]) g.add_edge(1 + o, 1 + a.k + set[0], inf);
    lo = std::max(lo, rho[o] / static_cast<double>(a.recovery_sets[o].size()));
  }
  std::vector<std::size_t> node_edge(a.n);
  for (std::size_t v = 0; v < a.n; ++v) node_edge[v] = g.add_edge(1 + a.k + v, sink, 0.0);
  auto feasible = [&](double t) {
    g.reset_flow();
    for (auto e : node_edge) g.set_capacity(e, t);
    return g.run(src, sink, 1e-16 * sigma) >= sigma - 1e-12 * std::max(1.0, sigma);
  };
  if (feasible(lo)) return lo;
  double hi = sigma;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

double optimal_max_load(const Allocation& a, const AllocationMatrices& m, std::span<const double> rho) {
  if (a.is_replica() && a.d == 1) {
    checked_sum(rho, a.k);
    std::vector<double> loads(a.n, 0.0);
    for (std::size_t o = 0; o < a.k; ++o) loads[a.recovery_sets[o].at(0).at(0)] += rho[o];
    return *std::max_element(loads.begin(), loads.end());
  }
  if (a.is_replica()) return parametric_replica(a, rho).second;
  return min_max_load(m, rho).max_load;
}

double imbalance_factor(const AllocationMatrices& m, std::span<const double> rho, std::size_t n) {
  const double sigma = checked_sum(rho, m.k);
  if (!(sigma > 0.0)) throw std::invalid_argument("imbalance_factor needs a positive total demand");
  if (n == 0) throw std::invalid_argument("n must be positive");
  return min_max_load(m, rho).max_load * static_cast<double>(n) / sigma;
}

StabilityVerdict exact_verdict(double max_load) {
  return {max_load <= 1.0 + kStabilityTol, max_load, ConditionKind::lp_exact};
}

namespace {

double max_window(const SpacingSample& s, std::size_t w) {
  if (w >= s.k()) return std::accumulate(s.values().begin(), s.values().end(), 0.0);
  auto sums = circular_window_sums(s.values(), w);
  return *std::max_element(sums.begin(), sums.end());
}

void check_sample(const Allocation& a, const SpacingSample& s) {
  if (s.k() != a.k)
    throw std::invalid_argument("demand sample has " + std::to_string(s.k()) + " entries, allocation has k = " +
                                std::to_string(a.k));
}

std::size_t xor_span(const Allocation& a) { return 1 + a.r * (a.d - 1); }

bool within(double stat, double threshold) { return stat <= threshold * (1.0 + 1e-9); }

}  // namespace

bool sufficient_condition(const Allocation& a, const SpacingSample& s) {
  check_sample(a, s);
  const double d = static_cast<double>(a.d);
  switch (a.kind) {
    case AllocationKind::single_choice:
      return max_nonoverlapping_m_spacing(s, a.k / a.n) <= 1.0;
    case AllocationKind::clustering:
    case AllocationKind::cyclic:
      return max_window(s, a.d) <= d;
    case AllocationKind::block_design:
      return max_window(s, a.d) <= d / 2.0;
    case AllocationKind::cyclic_xor:
      return max_window(s, xor_span(a)) <= d;
    case AllocationKind::custom:
      if (a.gap_radius && a.is_replica()) return max_window(s, *a.gap_radius + 1) <= d;
      break;
  }
  throw UnsupportedError(std::string("no stability condition for kind ") + to_string(a.kind));
}

bool necessary_condition(const Allocation& a, const SpacingSample& s, NecessaryForm form) {
  check_sample(a, s);
  const double d = static_cast<double>(a.d);
  const bool refined = form == NecessaryForm::refined;
  switch (a.kind) {
    case AllocationKind::single_choice:
      return within(max_nonoverlapping_m_spacing(s, a.k / a.n), 1.0);
    case AllocationKind::clustering:
      return refined ? within(max_window(s, a.d), 2.0 * d) : within(max_window(s, a.d + 1), 2.0 * d);
    case AllocationKind::cyclic:
      return refined ? within(max_window(s, a.d), 2.0 * d - 1.0) : within(max_window(s, a.d + 1), 2.0 * d);
    case AllocationKind::block_design:
      return within(max_window(s, a.d), d * d - 2.0 * d + 3.0);
    case AllocationKind::cyclic_xor: {
      const std::size_t D = xor_span(a);
      if (!refined) return within(max_window(s, D), 2.0 * d);
      const double extra = static_cast<double>(std::min(a.n, 2 * D - 1) - D) / static_cast<double>(a.r);
      return within(max_window(s, D), static_cast<double>(D) + extra);
    }
    case AllocationKind::custom:
      if (a.gap_radius && a.is_replica()) {
        const std::size_t r = *a.gap_radius;
        for (std::size_t i = 1; i + 2 * r <= a.n && i <= a.k; ++i)
          if (!within(max_window(s, i), static_cast<double>(i + 2 * r))) return false;
        return true;
      }
      break;
  }
  throw UnsupportedError(std::string("no stability condition for kind ") + to_string(a.kind));
}

void write_lp(std::ostream& os, const AllocationMatrices& m, std::span<const double> rho) {
  checked_sum(rho, m.k);
  char buf[64];
  os << "\\ min-max node load\nMinimize\n obj: t\nSubject To\n";
  std::vector<std::vector<std::size_t>> by_node(m.n), by_obj(m.k);
  for (std::size_t c = 0; c < m.columns(); ++c) {
    for (auto node : m.column_nodes[c]) by_node[node].push_back(c);
    by_obj[m.column_owner[c].first].push_back(c);
  }
  for (std::size_t v = 0; v < m.n; ++v) {
    os << " node" << v << ":";
    for (auto c : by_node[v]) os << " + x" << c;
    os << " - t <= 0\n";
  }
  for (std::size_t o = 0; o < m.k; ++o) {
    std::snprintf(buf, sizeof buf, "%.17g", rho[o]);
    os << " demand" << o << ":";
    if (by_obj[o].empty()) os << " 0 x0";
    for (auto c : by_obj[o]) os << " + x" << c;
    os << " = " << buf << "\n";
  }
  os << "End\n";
}

}  // namespace dchoice
