#include "dchoice/allocation.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "dchoice/errors.hpp"

namespace dchoice {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }

void require_positive(std::size_t v, const char* name) {
  if (v == 0) throw std::invalid_argument(std::string(name) + " must be positive");
}

// ---- GF(p^m) with p prime, elements as coefficient vectors of length m ----

struct PrimeField {
  std::uint64_t p;
  std::size_t m;
  std::vector<std::uint64_t> f;  // monic modulus, f[m] == 1

  using Elem = std::vector<std::uint64_t>;

  Elem mul(const Elem& a, const Elem& b) const {
    std::vector<std::uint64_t> prod(2 * m - 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (!a[i]) continue;
      for (std::size_t j = 0; j < m; ++j) prod[i + j] = (prod[i + j] + a[i] * b[j]) % p;
    }
    for (std::size_t t = 2 * m - 2; t >= m; --t) {
      std::uint64_t c = prod[t];
      if (!c) continue;
      for (std::size_t j = 0; j <= m; ++j)
        prod[t - m + j] = (prod[t - m + j] + (p - c) * f[j]) % p;
    }
    prod.resize(m);
    return prod;
  }

  Elem pow(Elem base, std::uint64_t e) const {
    Elem out(m, 0);
    out[0] = 1;
    while (e) {
      if (e & 1) out = mul(out, base);
      base = mul(base, base);
      e >>= 1;
    }
    return out;
  }

  Elem x() const {
    Elem e(m, 0);
    if (m == 1) e[0] = (p - f[0]) % p;
    else e[1] = 1;
    return e;
  }
};

std::vector<std::uint64_t> prime_factors(std::uint64_t v) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t q = 2; q * q <= v; ++q) {
    if (v % q) continue;
    out.push_back(q);
    while (v % q == 0) v /= q;
  }
  if (v > 1) out.push_back(v);
  return out;
}

std::optional<std::pair<std::uint64_t, std::size_t>> as_prime_power(std::uint64_t q) {
  if (q < 2) return std::nullopt;
  auto fac = prime_factors(q);
  if (fac.size() != 1) return std::nullopt;
  std::size_t e = 0;
  for (std::uint64_t v = q; v > 1; v /= fac[0]) ++e;
  return std::make_pair(fac[0], e);
}

bool is_one(const PrimeField::Elem& e) {
  if (e[0] != 1) return false;
  return std::all_of(e.begin() + 1, e.end(), [](std::uint64_t c) { return c == 0; });
}

// Smallest (lexicographic) monic modulus of degree m for which x is primitive.
PrimeField primitive_field(std::uint64_t p, std::size_t m) {
  std::uint64_t size = 1;
  for (std::size_t i = 0; i < m; ++i) size *= p;
  const std::uint64_t order = size - 1;
  const auto factors = prime_factors(order);
  PrimeField F{p, m, std::vector<std::uint64_t>(m + 1, 0)};
  F.f[m] = 1;
  for (std::uint64_t code = 0; code < size; ++code) {
    std::uint64_t c = code;
    for (std::size_t i = 0; i < m; ++i) {
      F.f[i] = c % p;
      c /= p;
    }
    if (F.f[0] == 0) continue;
    const auto g = F.x();
    if (!is_one(F.pow(g, order))) continue;
    bool primitive = true;
    for (auto l : factors) {
      if (is_one(F.pow(g, order / l))) {
        primitive = false;
        break;
      }
    }
    if (primitive) return F;
  }
  throw NumericalFailure("no primitive polynomial found");  // unreachable for prime p
}

}  // namespace

const char* to_string(AllocationKind kind) {
  switch (kind) {
    case AllocationKind::single_choice: return "single_choice";
    case AllocationKind::clustering: return "clustering";
    case AllocationKind::cyclic: return "cyclic";
    case AllocationKind::block_design: return "block_design";
    case AllocationKind::cyclic_xor: return "cyclic_xor";
    case AllocationKind::custom: return "custom";
  }
  return "custom";
}

AllocationKind parse_allocation_kind(const std::string& name) {
  for (auto k : {AllocationKind::single_choice, AllocationKind::clustering, AllocationKind::cyclic,
                 AllocationKind::block_design, AllocationKind::cyclic_xor, AllocationKind::custom})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown allocation kind '" + name + "'");
}

NodeSet Allocation::choice_union(std::size_t i) const {
  NodeSet out;
  for (const auto& set : recovery_sets.at(i)) out.insert(out.end(), set.begin(), set.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::vector<std::size_t>> Allocation::objects_per_node() const {
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < recovery_sets.size(); ++i)
    for (const auto& set : recovery_sets[i])
      if (set.size() == 1 && set[0] < n) out[set[0]].push_back(i);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

Allocation build_single_choice(std::size_t n, std::size_t m) {
  require_positive(n, "n");
  require_positive(m, "m");
  Allocation a;
  a.n = n;
  a.k = n * m;
  a.d = 1;
  a.kind = AllocationKind::single_choice;
  a.recovery_sets.resize(a.k);
  for (std::size_t i = 0; i < a.k; ++i) a.recovery_sets[i] = {{i / m}};
  return a;
}

Allocation build_clustering(std::size_t n, std::size_t d) {
  require_positive(n, "n");
  require_positive(d, "d");
  if (n % d != 0) throw std::invalid_argument("clustering needs d | n (n=" + str(n) + ", d=" + str(d) + ")");
  Allocation a;
  a.n = a.k = n;
  a.d = d;
  a.kind = AllocationKind::clustering;
  a.recovery_sets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t base = (i / d) * d;
    for (std::size_t j = 0; j < d; ++j) a.recovery_sets[i].push_back({base + j});
  }
  return a;
}

Allocation build_cyclic(std::size_t n, std::size_t d) {
  require_positive(n, "n");
  require_positive(d, "d");
  if (d > n) throw std::invalid_argument("cyclic needs d <= n (n=" + str(n) + ", d=" + str(d) + ")");
  Allocation a;
  a.n = a.k = n;
  a.d = d;
  a.kind = AllocationKind::cyclic;
  a.recovery_sets.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) a.recovery_sets[i].push_back({(i + j) % n});
  return a;
}

std::vector<std::size_t> singer_difference_set(std::size_t q) {
  auto pp = as_prime_power(q);
  if (!pp) throw UnsupportedError("block design needs d-1 to be a prime power, got d-1 = " + str(q));
  if (q > 64) throw UnsupportedError("block design limited to d-1 <= 64, got " + str(q));
  const auto [p, e] = *pp;
  const PrimeField F = primitive_field(p, 3 * e);
  const std::size_t N = q * q + q + 1;
  std::vector<std::size_t> D;
  auto g = F.x();
  PrimeField::Elem y(F.m, 0);
  y[0] = 1;
  for (std::size_t i = 0; i < N; ++i) {
    // Tr(y) = y + y^q + y^{q^2}
    auto yq = F.pow(y, q);
    auto yqq = F.pow(yq, q);
    bool zero = true;
    for (std::size_t c = 0; c < F.m && zero; ++c) zero = (y[c] + yq[c] + yqq[c]) % p == 0;
    if (zero) D.push_back(i);
    y = F.mul(y, g);
  }
  if (D.size() != q + 1) throw NumericalFailure("Singer construction produced a set of wrong size");
  return D;
}

Allocation build_block_design(std::size_t d) {
  if (d < 3) throw UnsupportedError("block design needs d >= 3, got " + str(d));
  const auto D = singer_difference_set(d - 1);
  const std::size_t n = d * d - d + 1;
  Allocation a;
  a.n = a.k = n;
  a.d = d;
  a.kind = AllocationKind::block_design;
  a.recovery_sets.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto delta : D) a.recovery_sets[i].push_back({(i + n - delta) % n});
  return a;
}

Allocation build_cyclic_xor(std::size_t n, std::size_t d, std::size_t r) {
  require_positive(n, "n");
  require_positive(d, "d");
  if (r < 2) throw std::invalid_argument("cyclic_xor needs r >= 2");
  if (n < 1 + r * (d - 1))
    throw std::invalid_argument("cyclic_xor needs n >= 1 + r(d-1) (n=" + str(n) + ", d=" + str(d) +
                                ", r=" + str(r) + ")");
  Allocation a;
  a.n = a.k = n;
  a.d = d;
  a.r = r;
  a.kind = AllocationKind::cyclic_xor;
  a.recovery_sets.resize(n);
  a.node_contents.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) a.node_contents[i].push_back({i});
  for (std::size_t i = 0; i < n; ++i) {
    a.recovery_sets[i].push_back({i});
    for (std::size_t j = 1; j < d; ++j) {
      NodeSet set;
      StoredItem item{i};
      for (std::size_t t = 1; t <= r; ++t) set.push_back((i + (j - 1) * r + t) % n);
      for (std::size_t t = 1; t < r; ++t) item.push_back((i + (j - 1) * r + t) % n);
      std::sort(set.begin(), set.end());
      std::sort(item.begin(), item.end());
      a.recovery_sets[i].push_back(std::move(set));
      a.node_contents[(i + j * r) % n].push_back(std::move(item));
    }
  }
  return a;
}

std::vector<std::vector<NodeSet>> derive_recovery_sets(
    std::size_t n, std::size_t k, const std::vector<std::vector<StoredItem>>& contents) {
  if (contents.size() != n) throw std::invalid_argument("contents must list every node");
  std::vector<std::vector<std::size_t>> exact(k);
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& item : contents[v]) {
      for (auto o : item)
        if (o >= k) throw std::invalid_argument("object id " + str(o) + " out of range");
      if (item.size() == 1) exact[item[0]].push_back(v);
    }
  std::vector<std::vector<NodeSet>> out(k);
  for (std::size_t o = 0; o < k; ++o)
    for (auto v : exact[o]) out[o].push_back({v});
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& item : contents[v]) {
      if (item.size() < 2) continue;
      for (auto o : item) {
        // every other member needs a unique exact copy off node v
        NodeSet set{v};
        bool ok = true;
        for (auto other : item) {
          if (other == o) continue;
          if (exact[other].size() != 1 || exact[other][0] == v) {
            ok = false;
            break;
          }
          set.push_back(exact[other][0]);
        }
        if (!ok) continue;
        std::sort(set.begin(), set.end());
        if (std::adjacent_find(set.begin(), set.end()) != set.end()) continue;
        out[o].push_back(std::move(set));
      }
    }
  for (auto& sets : out)
    std::stable_sort(sets.begin(), sets.end(), [](const NodeSet& a, const NodeSet& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return a < b;
    });
  for (auto& sets : out) sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  return out;
}

std::vector<std::string> validate_regular_balanced(const Allocation& a) {
  std::vector<std::string> v;
  if (a.n == 0 || a.k == 0 || a.d == 0 || a.r == 0) {
    v.push_back("n, k, d and r must be positive");
    return v;
  }
  if (a.recovery_sets.size() != a.k) {
    v.push_back("expected " + str(a.k) + " objects, found " + str(a.recovery_sets.size()));
    return v;
  }
  for (std::size_t i = 0; i < a.k; ++i) {
    const auto& sets = a.recovery_sets[i];
    if (sets.size() != a.d)
      v.push_back("object " + str(i) + ": " + str(sets.size()) + " choices, expected " + str(a.d));
    std::size_t singles = 0;
    std::set<std::size_t> seen;
    for (const auto& set : sets) {
      if (set.empty()) v.push_back("object " + str(i) + ": empty choice");
      if (set.size() == 1) ++singles;
      else if (set.size() != a.r)
        v.push_back("object " + str(i) + ": choice of size " + str(set.size()) + ", expected 1 or " + str(a.r));
      for (auto node : set) {
        if (node >= a.n) {
          v.push_back("object " + str(i) + ": node " + str(node) + " out of range");
          continue;
        }
        if (!seen.insert(node).second)
          v.push_back("object " + str(i) + ": node " + str(node) + " appears in more than one choice");
      }
    }
    if (a.r == 1 && singles != sets.size())
      v.push_back("object " + str(i) + ": replica allocation with a multi-node choice");
    if (a.r > 1 && singles != 1)
      v.push_back("object " + str(i) + ": " + str(singles) + " single-node choices, expected 1");
  }
  // every node must carry the same number of choice memberships
  std::vector<std::size_t> load(a.n, 0);
  for (const auto& sets : a.recovery_sets)
    for (const auto& set : sets)
      for (auto node : set)
        if (node < a.n) ++load[node];
  const std::size_t expect = (a.k * (1 + (a.d - 1) * a.r)) / a.n;
  if ((a.k * (1 + (a.d - 1) * a.r)) % a.n != 0)
    v.push_back("total choice memberships not divisible by n");
  for (std::size_t node = 0; node < a.n; ++node)
    if (load[node] != expect)
      v.push_back("node " + str(node) + ": " + str(load[node]) + " choice memberships, expected " + str(expect));
  if (!v.empty()) return v;

  if (!a.node_contents.empty()) {
    if (a.node_contents.size() != a.n) {
      v.push_back("node contents list " + str(a.node_contents.size()) + " nodes, expected " + str(a.n));
      return v;
    }
    std::size_t distinct0 = 0;
    for (std::size_t node = 0; node < a.n; ++node) {
      std::set<std::size_t> objs;
      for (const auto& item : a.node_contents[node]) objs.insert(item.begin(), item.end());
      if (node == 0) distinct0 = objs.size();
      else if (objs.size() != distinct0)
        v.push_back("node " + str(node) + ": stores " + str(objs.size()) + " different objects, node 0 stores " +
                    str(distinct0));
    }
    auto derived = derive_recovery_sets(a.n, a.k, a.node_contents);
    for (std::size_t i = 0; i < a.k; ++i)
      for (const auto& set : a.recovery_sets[i]) {
        NodeSet s = set;
        std::sort(s.begin(), s.end());
        if (std::find(derived[i].begin(), derived[i].end(), s) == derived[i].end())
          v.push_back("object " + str(i) + ": a choice is not implemented by the node contents");
      }
  }
  return v;
}

std::size_t overlap_sum(const Allocation& a) {
  if (!a.is_replica()) throw UnsupportedError("overlap_sum is defined for replica allocations only");
  // each node hosting c objects contributes c(c-1) ordered pairs
  std::vector<std::size_t> count(a.n, 0);
  for (std::size_t i = 0; i < a.k; ++i)
    for (auto node : a.choice_union(i)) ++count[node];
  std::size_t total = 0;
  for (auto c : count) total += c * (c > 0 ? c - 1 : 0);
  return total;
}

std::size_t node_expansion(const Allocation& a, std::span<const std::size_t> objects) {
  std::vector<char> hit(a.n, 0);
  std::size_t count = 0;
  for (auto o : objects) {
    if (o >= a.k) throw std::invalid_argument("object " + str(o) + " out of range");
    for (const auto& set : a.recovery_sets[o])
      for (auto node : set)
        if (!hit[node]) {
          hit[node] = 1;
          ++count;
        }
  }
  return count;
}

namespace {

std::size_t circular_distance(std::size_t i, std::size_t j, std::size_t k) {
  std::size_t diff = i > j ? i - j : j - i;
  return std::min(diff, k - diff);
}

bool unions_intersect(const NodeSet& a, const NodeSet& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) return true;
    if (*ia < *ib) ++ia;
    else ++ib;
  }
  return false;
}

}  // namespace

bool is_r_gap(const Allocation& a, std::size_t radius) { return min_gap_radius(a) <= radius; }

std::size_t min_gap_radius(const Allocation& a) {
  if (!a.is_replica()) throw UnsupportedError("r-gap is defined for replica allocations only");
  std::vector<NodeSet> u(a.k);
  for (std::size_t i = 0; i < a.k; ++i) u[i] = a.choice_union(i);
  std::size_t radius = 0;
  for (std::size_t i = 0; i < a.k; ++i)
    for (std::size_t j = i + 1; j < a.k; ++j)
      if (unions_intersect(u[i], u[j])) radius = std::max(radius, circular_distance(i, j, a.k));
  return radius;
}

std::map<std::size_t, std::size_t> pairwise_overlap_histogram(const Allocation& a) {
  std::vector<NodeSet> u(a.k);
  for (std::size_t i = 0; i < a.k; ++i) u[i] = a.choice_union(i);
  std::map<std::size_t, std::size_t> hist;
  NodeSet tmp;
  for (std::size_t i = 0; i < a.k; ++i)
    for (std::size_t j = i + 1; j < a.k; ++j) {
      tmp.clear();
      std::set_intersection(u[i].begin(), u[i].end(), u[j].begin(), u[j].end(), std::back_inserter(tmp));
      ++hist[tmp.size()];
    }
  return hist;
}

HallCheck hall_check(const Allocation& a, std::size_t exhaustive_limit, std::size_t samples,
                     std::uint64_t seed) {
  HallCheck out;
  std::vector<std::size_t> subset;
  auto test = [&]() {
    ++out.subsets_checked;
    if (node_expansion(a, subset) < subset.size()) {
      out.holds = false;
      out.violating_set = subset;
      return false;
    }
    return true;
  };
  if (a.k <= exhaustive_limit && a.k < 63) {
    out.exhaustive = true;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << a.k); ++mask) {
      subset.clear();
      for (std::size_t i = 0; i < a.k; ++i)
        if (mask >> i & 1) subset.push_back(i);
      if (!test()) return out;
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(a.k);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t s = 0; s < samples; ++s) {
    // alternate between random subsets and random circular runs, which are the
    // tight sets for cyclic-type designs
    const std::size_t size = 1 + rng() % a.k;
    subset.clear();
    if (s % 2 == 0) {
      std::shuffle(perm.begin(), perm.end(), rng);
      subset.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
    } else {
      const std::size_t start = rng() % a.k;
      for (std::size_t t = 0; t < size; ++t) subset.push_back((start + t) % a.k);
    }
    std::sort(subset.begin(), subset.end());
    if (!test()) return out;
  }
  return out;
}

std::vector<std::vector<int>> AllocationMatrices::dense_M() const {
  std::vector<std::vector<int>> M(n, std::vector<int>(columns(), 0));
  for (std::size_t c = 0; c < columns(); ++c)
    for (auto node : column_nodes[c]) M[node][c] = 1;
  return M;
}

std::vector<std::vector<int>> AllocationMatrices::dense_T() const {
  std::vector<std::vector<int>> T(k, std::vector<int>(columns(), 0));
  for (std::size_t c = 0; c < columns(); ++c) T[column_owner[c].first][c] = 1;
  return T;
}

AllocationMatrices AllocationMatrices::from_dense(const std::vector<std::vector<int>>& M,
                                                  const std::vector<std::vector<int>>& T) {
  if (M.empty() || T.empty()) throw std::invalid_argument("empty matrix");
  const std::size_t L = M[0].size();
  for (const auto& row : M)
    if (row.size() != L) throw std::invalid_argument("M rows differ in length");
  for (const auto& row : T)
    if (row.size() != L) throw std::invalid_argument("T and M column counts differ");
  AllocationMatrices out;
  out.n = M.size();
  out.k = T.size();
  std::vector<std::size_t> per_object(out.k, 0);
  for (std::size_t c = 0; c < L; ++c) {
    std::size_t owner = out.k;
    for (std::size_t i = 0; i < out.k; ++i) {
      if (T[i][c] == 0) continue;
      if (T[i][c] != 1 || owner != out.k)
        throw std::invalid_argument("T column " + str(c) + " must contain exactly one 1");
      owner = i;
    }
    if (owner == out.k) throw std::invalid_argument("T column " + str(c) + " must contain exactly one 1");
    NodeSet nodes;
    for (std::size_t j = 0; j < out.n; ++j) {
      if (M[j][c] != 0 && M[j][c] != 1) throw std::invalid_argument("M must be 0/1");
      if (M[j][c]) nodes.push_back(j);
    }
    out.column_nodes.push_back(std::move(nodes));
    out.column_owner.emplace_back(owner, per_object[owner]++);
  }
  return out;
}

AllocationMatrices to_matrices(const Allocation& a) {
  AllocationMatrices out;
  out.n = a.n;
  out.k = a.k;
  for (std::size_t i = 0; i < a.recovery_sets.size(); ++i)
    for (std::size_t j = 0; j < a.recovery_sets[i].size(); ++j) {
      NodeSet s = a.recovery_sets[i][j];
      std::sort(s.begin(), s.end());
      for (auto node : s)
        if (node >= a.n) throw std::invalid_argument("node " + str(node) + " out of range");
      out.column_nodes.push_back(std::move(s));
      out.column_owner.emplace_back(i, j);
    }
  return out;
}

}  // namespace dchoice
