#pragma once

#include <iosfwd>
#include <string>

#include "dchoice/allocation.hpp"
#include "json.hpp"

namespace dchoice {

/// {"n", "k", "d", "r", "kind", "recovery_sets", ["gap_radius"], ["node_contents"]}
nlohmann::json allocation_to_json(const Allocation& alloc);

/// Inverse of allocation_to_json. When "recovery_sets" is absent but
/// "node_contents" is given, the sets are derived from the contents. Throws
/// InputError naming the offending JSON path. Does not validate balance.
Allocation allocation_from_json(const nlohmann::json& j);

/// Reads and parses an allocation file; parse errors carry the byte offset.
Allocation load_allocation_file(const std::string& path);

/// M as CSV: a header row of column owners "o<i>:c<j>", then one 0/1 row per node.
void write_matrix_csv(std::ostream& os, const AllocationMatrices& m);

}  // namespace dchoice
