#pragma once

#include <array>
#include <vector>

#include "dchoice/allocation.hpp"

namespace dchoice {

/// normal . rho <= offset
struct Halfspace {
  std::array<double, 3> normal;
  double offset;
};

/// Capacity region of a 3-object replica allocation and its slice by the
/// plane rho_1 + rho_2 + rho_3 = sigma.
struct ExactRegionK3 {
  std::vector<Halfspace> halfspaces;  // rho(S) <= |N(S)| for all S, then rho >= 0
  double simplex_sigma = 0.0;
  std::vector<std::array<double, 3>> polygon;  // slice vertices, counter-clockwise, deduplicated
  double p_sigma = 0.0;                        // slice area / simplex area
};

ExactRegionK3 exact_region_k3(const Allocation& alloc, double sigma);

/// Exact P_Sigma for k = n = 3 replica allocations.
double exact_P_sigma_k3(const Allocation& alloc, double sigma);

}  // namespace dchoice
