#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "dchoice/allocation.hpp"
#include "dchoice/spacings.hpp"

namespace dchoice {

/// An optimal demand split: portions[c] is the demand routed through column c.
struct LoadSplit {
  std::vector<double> portions;
  double max_load = 0.0;
  std::vector<double> node_loads;
};

/// Verdict tolerance: a system counts as stable when t* <= 1 + kStabilityTol.
inline constexpr double kStabilityTol = 1e-9;

/// min t s.t. M x <= t, T x = rho, x >= 0, solved by the simplex method on
/// max lambda s.t. M y <= 1, T y >= lambda rho. The result is certified by
/// a dual check; failures throw NumericalFailure.
LoadSplit min_max_load(const AllocationMatrices& m, std::span<const double> rho);

/// Exact t* for a replica allocation: t* = max_S rho(S)/|N(S)|, found by a
/// parametric max-flow (each min cut yields a denser set until none exists).
LoadSplit min_max_load_replica(const Allocation& alloc, std::span<const double> rho);

/// t* within `tol` by bisection on [max rho_i/d_i, sum rho] with a max-flow
/// feasibility test. Replicas only.
double min_max_load_flow(const Allocation& alloc, std::span<const double> rho, double tol);

/// The fastest exact route for the allocation: direct evaluation when every
/// object has one choice, the parametric flow for replicas, the LP otherwise.
/// `m` must be to_matrices(alloc).
double optimal_max_load(const Allocation& alloc, const AllocationMatrices& m, std::span<const double> rho);

/// t* n / sum(rho) via the LP.
double imbalance_factor(const AllocationMatrices& m, std::span<const double> rho, std::size_t n);

enum class ConditionKind { lp_exact, sufficient, necessary };

struct StabilityVerdict {
  bool stable = false;
  double max_load = 0.0;
  ConditionKind condition_kind = ConditionKind::lp_exact;
};

StabilityVerdict exact_verdict(double max_load);

/// Which necessary condition to evaluate where two forms exist.
///   standard: cyclic/clustering window d+1 <= 2d; cyclic_xor window D <= 2d
///             with D = 1 + r(d-1).
///   refined:  cyclic window d <= 2d-1; clustering window d <= 2d; cyclic_xor
///             window D <= D + (min(n, 2D-1) - D)/r.
/// Block designs, single choice and custom r-gap allocations have one form.
enum class NecessaryForm { standard, refined };

/// Window statistics are evaluated on the actual demands, so a window sum is
/// M^(c) * Sigma. True implies t* <= 1.
bool sufficient_condition(const Allocation& alloc, const SpacingSample& demand);

/// False implies t* > 1 (up to a relative slack of 1e-9 on the threshold).
bool necessary_condition(const Allocation& alloc, const SpacingSample& demand,
                         NecessaryForm form = NecessaryForm::standard);

/// Writes the LP in CPLEX LP text format.
void write_lp(std::ostream& os, const AllocationMatrices& m, std::span<const double> rho);

}  // namespace dchoice
