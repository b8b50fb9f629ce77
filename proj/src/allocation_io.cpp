#include "dchoice/allocation_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "dchoice/errors.hpp"

namespace dchoice {

using nlohmann::json;

json allocation_to_json(const Allocation& a) {
  json j;
  j["n"] = a.n;
  j["k"] = a.k;
  j["d"] = a.d;
  j["r"] = a.r;
  j["kind"] = to_string(a.kind);
  j["recovery_sets"] = a.recovery_sets;
  if (a.gap_radius) j["gap_radius"] = *a.gap_radius;
  if (!a.node_contents.empty()) j["node_contents"] = a.node_contents;
  return j;
}

namespace {

std::size_t get_count(const json& j, const char* key, const std::string& where, bool required,
                      std::size_t fallback = 0) {
  if (!j.contains(key)) {
    if (required) throw InputError(where + "/" + key + ": missing");
    return fallback;
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw InputError(where + "/" + key + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_ids(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < j.size(); ++t) {
    if (!j[t].is_number_integer() || j[t].get<long long>() < 0) throw InputError(where + "/" + std::to_string(t) + ": expected a non-negative integer");
    out.push_back(j[t].get<std::size_t>());
  }
  return out;
}

std::vector<std::vector<std::vector<std::size_t>>> get_nested(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array");
  std::vector<std::vector<std::vector<std::size_t>>> out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string wi = where + "/" + std::to_string(i);
    if (!j[i].is_array()) throw InputError(wi + ": expected an array");
    for (std::size_t c = 0; c < j[i].size(); ++c) out[i].push_back(get_ids(j[i][c], wi + "/" + std::to_string(c)));
  }
  return out;
}

}  // namespace

Allocation allocation_from_json(const json& j) {
  if (!j.is_object()) throw InputError(": expected a JSON object");
  Allocation a;
  a.n = get_count(j, "n", "", true);
  a.r = get_count(j, "r", "", false, 1);
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw InputError("/kind: expected a string");
    try {
      a.kind = parse_allocation_kind(j["kind"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("/kind: ") + e.what());
    }
  }
  if (j.contains("gap_radius")) a.gap_radius = get_count(j, "gap_radius", "", true);
  if (j.contains("node_contents")) {
    a.node_contents = get_nested(j["node_contents"], "/node_contents");
    if (a.node_contents.size() != a.n)
      throw InputError("/node_contents: lists " + std::to_string(a.node_contents.size()) + " nodes, n = " +
                       std::to_string(a.n));
  }
  if (j.contains("recovery_sets")) {
    a.recovery_sets = get_nested(j["recovery_sets"], "/recovery_sets");
  } else if (!a.node_contents.empty()) {
    std::size_t k = 0;
    for (const auto& items : a.node_contents)
      for (const auto& item : items)
        for (auto o : item) k = std::max(k, o + 1);
    k = get_count(j, "k", "", false, k);
    try {
      a.recovery_sets = derive_recovery_sets(a.n, k, a.node_contents);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("/node_contents: ") + e.what());
    }
  } else {
    throw InputError("/recovery_sets: missing");
  }
  a.k = get_count(j, "k", "", false, a.recovery_sets.size());
  if (a.k != a.recovery_sets.size())
    throw InputError("/k: " + std::to_string(a.k) + " but " + std::to_string(a.recovery_sets.size()) +
                     " objects listed");
  std::size_t dmax = 0;
  for (const auto& sets : a.recovery_sets) dmax = std::max(dmax, sets.size());
  a.d = get_count(j, "d", "", false, dmax);
  for (std::size_t i = 0; i < a.recovery_sets.size(); ++i)
    for (std::size_t c = 0; c < a.recovery_sets[i].size(); ++c)
      for (auto node : a.recovery_sets[i][c])
        if (node >= a.n)
          throw InputError("/recovery_sets/" + std::to_string(i) + "/" + std::to_string(c) + ": node " +
                           std::to_string(node) + " >= n");
  return a;
}

Allocation load_allocation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    return allocation_from_json(j);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_matrix_csv(std::ostream& os, const AllocationMatrices& m) {
  for (std::size_t c = 0; c < m.columns(); ++c)
    os << (c ? "," : "") << 'o' << m.column_owner[c].first << ":c" << m.column_owner[c].second;
  os << '\n';
  const auto M = m.dense_M();
  for (const auto& row : M) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
}

}  // namespace dchoice
