#pragma once

// Independent reference computations used only by the tests. Each one is
// deliberately naive (exhaustive or grid based) so it shares no code path
// with the library routine it checks.

#include <cstddef>
#include <string>
#include <vector>

#include "dchoice/allocation.hpp"

namespace oracle {

/// max over nonempty S of rho(S)/|N(S)|, by enumerating all 2^k - 1 subsets.
double hall_max_load(const dchoice::Allocation& a, const std::vector<double>& rho);

/// Min-max load by grid search over each object's split, for allocations
/// with at most 3 objects of 2 choices each. Coarse grid, then a fine grid
/// around the best point.
double grid_max_load(const dchoice::AllocationMatrices& m, const std::vector<double>& rho);

/// Largest window sum by direct summation, O(k w).
double window_max(const std::vector<double>& v, std::size_t w, bool circle);

/// Plain bisection for (1 + a) e^{-a} = e^{-1/c}.
double alpha_by_bisection(double c);

/// |C_i & C_j| over all unordered pairs by set intersection on std::set.
std::vector<std::size_t> pair_overlaps(const dchoice::Allocation& a);

/// True if the two replica allocations are equal up to relabeling objects
/// and nodes (tries every object permutation; k <= 8).
bool isomorphic(const dchoice::Allocation& a, const dchoice::Allocation& b);

/// Per node, the set of objects stored there (replicas), as sorted vectors.
std::vector<std::vector<std::size_t>> node_contents(const dchoice::Allocation& a);

/// Parses a layout such as "abc afg ade" (one token per node, objects as
/// letters) into a replica allocation.
dchoice::Allocation from_letters(const std::string& layout);

}  // namespace oracle
