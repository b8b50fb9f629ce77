#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dchoice {

enum class AllocationKind { single_choice, clustering, cyclic, block_design, cyclic_xor, custom };

const char* to_string(AllocationKind kind);
AllocationKind parse_allocation_kind(const std::string& name);

using NodeSet = std::vector<std::size_t>;

/// One stored item: the ids of the objects XOR'ed into it (a single id is an
/// exact copy).
using StoredItem = std::vector<std::size_t>;

/// A d-choice storage allocation. Objects and nodes are 0-based; object i's
/// choices are recovery_sets[i], each a set of nodes that jointly serve it.
struct Allocation {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t d = 0;
  std::size_t r = 1;
  AllocationKind kind = AllocationKind::custom;
  std::vector<std::vector<NodeSet>> recovery_sets;
  /// Declared r-gap radius of a custom replica allocation. Enables the
  /// stability conditions for kind == custom.
  std::optional<std::size_t> gap_radius;
  /// What each node stores. Optional for replicas, where it follows from the
  /// recovery sets; filled by build_cyclic_xor.
  std::vector<std::vector<StoredItem>> node_contents;

  bool is_replica() const noexcept { return r == 1; }
  /// Sorted union of all nodes in object i's recovery sets.
  NodeSet choice_union(std::size_t i) const;
  /// Per node, the sorted objects that have a replica choice on it.
  std::vector<std::vector<std::size_t>> objects_per_node() const;
};

/// Node i stores objects i*m .. i*m+m-1.
Allocation build_single_choice(std::size_t n, std::size_t m);

/// Nodes jd..jd+d-1 form a cluster holding objects jd..jd+d-1. Needs d | n.
Allocation build_clustering(std::size_t n, std::size_t d);

/// Object i on nodes i, i+1, ..., i+d-1 (mod n).
Allocation build_cyclic(std::size_t n, std::size_t d);

/// Symmetric (d, 1) block design on n = k = d^2-d+1 from a Singer difference
/// set; d-1 must be a prime power. Node j stores {j + delta : delta in D}.
Allocation build_block_design(std::size_t d);

/// The Singer difference set used by build_block_design(d), sorted.
std::vector<std::size_t> singer_difference_set(std::size_t q);

/// Object i: primary {i}, then d-1 recovery sets {i+1..i+r}, {i+r+1..i+2r}, ...
/// (mod n). Each recovery set {i+(j-1)r+1 .. i+jr} is implemented by an XOR of
/// o_i with o_{i+(j-1)r+1} .. o_{i+jr-1}, stored on node i+jr.
Allocation build_cyclic_xor(std::size_t n, std::size_t d, std::size_t r);

/// Derives every recovery set implied by a content layout: object i gets its
/// exact-copy node(s) as singleton choices, and every XOR item containing i
/// on node v whose other members have exact copies elsewhere gives the set
/// {v} + those nodes. Sets are sorted; choices are ordered singletons first,
/// then by smallest node, without duplicates.
std::vector<std::vector<NodeSet>> derive_recovery_sets(
    std::size_t n, std::size_t k, const std::vector<std::vector<StoredItem>>& contents);

/// Violations of the regular balanced d-choice property, empty when valid.
std::vector<std::string> validate_regular_balanced(const Allocation& alloc);

/// Sum over ordered pairs i != j of |C_i & C_j|. Replicas only.
std::size_t overlap_sum(const Allocation& alloc);

/// |N(S)|: number of distinct nodes in the recovery sets of `objects`.
std::size_t node_expansion(const Allocation& alloc, std::span<const std::size_t> objects);

/// True iff objects at circular index distance > radius have disjoint choices.
bool is_r_gap(const Allocation& alloc, std::size_t radius);

/// Smallest radius for which is_r_gap holds.
std::size_t min_gap_radius(const Allocation& alloc);

/// Number of unordered object pairs per overlap size |C_i & C_j|.
std::map<std::size_t, std::size_t> pairwise_overlap_histogram(const Allocation& alloc);

struct HallCheck {
  bool holds = true;
  bool exhaustive = false;
  std::size_t subsets_checked = 0;
  std::vector<std::size_t> violating_set;  // empty when holds
};

/// Checks |N(S)| >= |S| over all subsets when k <= exhaustive_limit, else over
/// `samples` random subsets drawn from `seed`.
HallCheck hall_check(const Allocation& alloc, std::size_t exhaustive_limit = 12,
                     std::size_t samples = 20000, std::uint64_t seed = 1);

/// Routing matrices in sparse column form. Column c is a demand portion of
/// object column_owner[c].first through its choice column_owner[c].second,
/// and loads every node in column_nodes[c].
struct AllocationMatrices {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<NodeSet> column_nodes;
  std::vector<std::pair<std::size_t, std::size_t>> column_owner;

  std::size_t columns() const noexcept { return column_nodes.size(); }
  std::vector<std::vector<int>> dense_M() const;
  std::vector<std::vector<int>> dense_T() const;

  /// Builds from dense 0/1 matrices; every T column needs exactly one 1.
  static AllocationMatrices from_dense(const std::vector<std::vector<int>>& M,
                                       const std::vector<std::vector<int>>& T);
};

/// Columns are ordered object-major, choice-minor.
AllocationMatrices to_matrices(const Allocation& alloc);

}  // namespace dchoice
