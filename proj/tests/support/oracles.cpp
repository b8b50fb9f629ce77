#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace oracle {

double hall_max_load(const dchoice::Allocation& a, const std::vector<double>& rho) {
  if (a.k > 20) throw std::invalid_argument("hall oracle limited to k <= 20");
  double best = 0.0;
  for (unsigned long mask = 1; mask < (1ul << a.k); ++mask) {
    double load = 0.0;
    std::set<std::size_t> nodes;
    for (std::size_t i = 0; i < a.k; ++i) {
      if (!(mask >> i & 1)) continue;
      load += rho[i];
      for (const auto& s : a.recovery_sets[i]) nodes.insert(s.begin(), s.end());
    }
    best = std::max(best, load / static_cast<double>(nodes.size()));
  }
  return best;
}

namespace {

double eval_split(const dchoice::AllocationMatrices& m, const std::vector<double>& rho,
                  const std::vector<double>& frac) {
  std::vector<double> load(m.n, 0.0);
  std::vector<int> seen(m.k, 0);
  for (std::size_t c = 0; c < m.columns(); ++c) {
    const auto o = m.column_owner[c].first;
    const double share = seen[o]++ == 0 ? frac[o] : 1.0 - frac[o];
    for (auto node : m.column_nodes[c]) load[node] += share * rho[o];
  }
  return *std::max_element(load.begin(), load.end());
}

}  // namespace

double grid_max_load(const dchoice::AllocationMatrices& m, const std::vector<double>& rho) {
  if (m.k > 3) throw std::invalid_argument("grid oracle limited to 3 objects");
  std::vector<int> per(m.k, 0);
  for (const auto& o : m.column_owner) ++per[o.first];
  for (int p : per)
    if (p != 2) throw std::invalid_argument("grid oracle needs 2 choices per object");
  std::vector<double> best_f(m.k, 0.5), f(m.k);
  double best = std::numeric_limits<double>::infinity();
  auto sweep = [&](std::vector<double> lo, double step, int steps) {
    std::vector<int> idx(m.k, 0);
    for (;;) {
      for (std::size_t o = 0; o < m.k; ++o) f[o] = std::clamp(lo[o] + step * idx[o], 0.0, 1.0);
      const double v = eval_split(m, rho, f);
      if (v < best) {
        best = v;
        best_f = f;
      }
      std::size_t a = 0;
      while (a < m.k && ++idx[a] > steps) idx[a++] = 0;
      if (a == m.k) return;
    }
  };
  sweep(std::vector<double>(m.k, 0.0), 0.01, 100);
  std::vector<double> lo(best_f);
  for (auto& v : lo) v -= 0.02;
  sweep(lo, 0.0005, 80);
  return best;
}

double window_max(const std::vector<double>& v, std::size_t w, bool circle) {
  const std::size_t k = v.size();
  const std::size_t starts = circle ? k : k - w + 1;
  double best = -1.0;
  for (std::size_t i = 0; i < starts; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w; ++j) s += v[(i + j) % k];
    best = std::max(best, s);
  }
  return best;
}

double alpha_by_bisection(double c) {
  auto h = [c](double a) { return (1.0 + a) * std::exp(-a) - std::exp(-1.0 / c); };
  double lo = 1e-12, hi = 100.0;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::size_t> pair_overlaps(const dchoice::Allocation& a) {
  std::vector<std::set<std::size_t>> u(a.k);
  for (std::size_t i = 0; i < a.k; ++i)
    for (const auto& s : a.recovery_sets[i]) u[i].insert(s.begin(), s.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.k; ++i)
    for (std::size_t j = i + 1; j < a.k; ++j) {
      std::size_t c = 0;
      for (auto x : u[i]) c += u[j].count(x);
      out.push_back(c);
    }
  return out;
}

std::vector<std::vector<std::size_t>> node_contents(const dchoice::Allocation& a) {
  std::vector<std::vector<std::size_t>> out(a.n);
  for (std::size_t i = 0; i < a.k; ++i)
    for (const auto& s : a.recovery_sets[i])
      for (auto node : s) out[node].push_back(i);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

bool isomorphic(const dchoice::Allocation& a, const dchoice::Allocation& b) {
  if (a.n != b.n || a.k != b.k || a.k > 8) return false;
  auto blocks_b = node_contents(b);
  std::sort(blocks_b.begin(), blocks_b.end());
  const auto blocks_a = node_contents(a);
  std::vector<std::size_t> perm(a.k);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    auto mapped = blocks_a;
    for (auto& blk : mapped) {
      for (auto& o : blk) o = perm[o];
      std::sort(blk.begin(), blk.end());
    }
    std::sort(mapped.begin(), mapped.end());
    if (mapped == blocks_b) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

dchoice::Allocation from_letters(const std::string& layout) {
  std::istringstream in(layout);
  std::vector<std::string> nodes;
  for (std::string tok; in >> tok;) nodes.push_back(tok);
  dchoice::Allocation a;
  a.n = nodes.size();
  std::size_t k = 0;
  for (const auto& t : nodes)
    for (char ch : t) k = std::max<std::size_t>(k, static_cast<std::size_t>(ch - 'a') + 1);
  a.k = k;
  a.recovery_sets.resize(k);
  for (std::size_t v = 0; v < nodes.size(); ++v)
    for (char ch : nodes[v]) a.recovery_sets[static_cast<std::size_t>(ch - 'a')].push_back({v});
  a.d = a.recovery_sets.empty() ? 0 : a.recovery_sets[0].size();
  a.kind = dchoice::AllocationKind::custom;
  return a;
}

}  // namespace oracle
