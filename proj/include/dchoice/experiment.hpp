#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dchoice/allocation.hpp"
#include "dchoice/metrics.hpp"
#include "json.hpp"

namespace dchoice {

inline constexpr const char* kVersion = "0.1.0";

/// Cumulative load: absolute, a fraction of n, or b n / log n.
struct SigmaSpec {
  enum class Mode { absolute, fraction, b };
  Mode mode = Mode::fraction;
  double value = 0.8;

  double resolve(std::size_t n) const;
  nlohmann::json to_json() const;
};

/// One allocation plus load. For single_choice, m objects per node (k = n m);
/// block_design derives n from d; `allocation_file` loads a custom design.
struct DesignPoint {
  AllocationKind kind = AllocationKind::cyclic;
  std::size_t n = 0;
  std::size_t d = 1;
  std::size_t r = 1;
  std::size_t m = 1;
  std::optional<std::size_t> k;
  std::string allocation_file;
  SigmaSpec sigma;

  nlohmann::json to_json() const;
};

struct OutputSpec {
  std::string format;  // "csv" or "json"
  std::string path;    // "-" for stdout
};

struct GumbelCheckSpec {
  std::size_t k = 10000;
  std::size_t d = 1;
  std::size_t trials = 10000;
  double threshold = 0.02;
};

/// N(lo, hi) with the bounds of regime R1 (alpha/k, beta/k), R2
/// (alpha/k^2, beta/k^2) or R3 ((log k + alpha)/k, (log k + beta)/k).
struct CountCheckSpec {
  int regime = 3;
  std::size_t k = 1000;
  double alpha = 0.0;
  double beta = 1.0;
  std::size_t trials = 10000;
  double rel_slack = 0.02;
};

struct CircularCheckSpec {
  std::size_t k = 100;
  std::size_t d = 3;
  std::size_t trials = 100000;
};

struct LimitCheckSpec {
  std::vector<GumbelCheckSpec> gumbel{GumbelCheckSpec{}};
  std::vector<CountCheckSpec> counts{CountCheckSpec{}};
  std::vector<CircularCheckSpec> circular{CircularCheckSpec{}};
};

struct ExperimentConfig {
  std::vector<DesignPoint> points;
  std::size_t trials = 1000;
  std::uint64_t master_seed = 1;
  std::size_t threads = 0;
  std::vector<OutputSpec> outputs;
  LimitCheckSpec limits;

  /// Canonical echo embedded in reports (outputs and threads excluded since
  /// they do not affect results).
  nlohmann::json to_json() const;
};

/// Parses a config document. Top-level point fields (kind, n, d, r, m, k,
/// sigma) may be lists; their Cartesian product forms the sweep. An explicit
/// "points" array instead lists points, each inheriting top-level defaults
/// and expanding its own lists. Throws ConfigError with the field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

Allocation build_allocation(const DesignPoint& p);

struct ResultRow {
  DesignPoint point;
  std::size_t n = 0;
  std::size_t k = 0;
  double sigma = 0.0;
  MetricEstimate p_sigma;
  ImbalanceEstimate imbalance;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
};

ExperimentReport run_simulate(const ExperimentConfig& cfg);

inline constexpr const char* kCsvColumns =
    "kind,n,k,d,r,sigma,trials,p_sigma,p_lo,p_hi,i_mean,i_stderr,i_q05,i_q50,i_q95,seed";

/// First line "# dchoice <version> config=<json>", then the header, then one
/// row per point.
void write_csv(std::ostream& os, const ExperimentReport& rep);

/// {"metadata": {...}, "config": ..., "results": [...]}; only metadata may
/// vary between identical runs.
nlohmann::json report_to_json(const ExperimentReport& rep, const std::string& timestamp);

struct LimitCheckResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string note;
};

/// KS distance between M*k - (log k + (d-1) log log k - log((d-1)!)) and the
/// Gumbel CDF, for the line or circle statistic.
LimitCheckResult gumbel_limit_check(const GumbelCheckSpec& spec, bool circle, std::uint64_t seed,
                                    const RunOptions& opt = {});

/// Mean spacing count against its asymptotic mean; the tolerance is
/// 3 standard errors plus rel_slack times the asymptotic mean.
LimitCheckResult count_limit_check(const CountCheckSpec& spec, std::uint64_t seed, const RunOptions& opt = {});

/// Pr{M^(c) != M} <= d/k and P(M > x) <= P(M^(c) > x) <= k/(k-d) P(M > x) at
/// the empirical 0.5 and 0.9 quantiles of M, each with 3 standard errors.
std::vector<LimitCheckResult> circular_limit_checks(const CircularCheckSpec& spec, std::uint64_t seed,
                                                    const RunOptions& opt = {});

std::vector<LimitCheckResult> run_limit_checks(const ExperimentConfig& cfg);

nlohmann::json limit_checks_to_json(const std::vector<LimitCheckResult>& results);

/// Validation, overlap sum, r-gap radius, Hall check, matrix size, pairwise
/// overlap histogram.
nlohmann::json run_inspect(const Allocation& alloc);

}  // namespace dchoice
