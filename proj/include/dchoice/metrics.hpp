#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dchoice/allocation.hpp"
#include "dchoice/spacings.hpp"

namespace dchoice {

struct MetricEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

struct ImbalanceEstimate : MetricEstimate {
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

struct RunOptions {
  std::size_t threads = 0;  // 0: hardware concurrency
};

/// Optimal max node load t* for trials 0..trials-1. Trial i draws its demand
/// from RandomStream(seed, i), so equal (k, seed) pairs see identical demand
/// vectors. Results do not depend on the thread count. Solver failures are
/// rethrown as NumericalFailure naming the trial.
std::vector<double> simulate_max_loads(const Allocation& alloc, double sigma, std::size_t trials,
                                       std::uint64_t seed, const RunOptions& opt = {});

/// Runs `fn(i)` for i in [0, count) on a worker pool and returns the results
/// in index order. The first failing index (lowest) has its exception rethrown.
std::vector<double> parallel_map(std::size_t count, const std::function<double(std::size_t)>& fn,
                                 const RunOptions& opt = {});

/// Wilson 95% interval around the fraction of stable trials.
MetricEstimate summarize_stability(const std::vector<double>& max_loads, std::uint64_t seed);

/// Mean of t* n / sigma with a normal 95% interval and type-7 quantiles.
ImbalanceEstimate summarize_imbalance(const std::vector<double>& max_loads, std::size_t n, double sigma,
                                      std::uint64_t seed);

MetricEstimate estimate_P_sigma(const Allocation& alloc, double sigma, std::size_t trials,
                                std::uint64_t seed, const RunOptions& opt = {});

ImbalanceEstimate estimate_I(const Allocation& alloc, double sigma, std::size_t trials, std::uint64_t seed,
                             const RunOptions& opt = {});

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

/// sup |F_n - F| of the sample against a continuous CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Finite-n calibration of a limit-theorem check. The observed mean of I is
/// divided by a reference value (the upper band end for d-choice and XOR,
/// (log n + f_n + Euler gamma)/m for single choice) and must land in
/// [ratio_lo, ratio_hi]. P_Sigma is probed at b = below_factor times the
/// stable threshold and b = above_factor times the unstable threshold.
struct BandCheckConfig {
  Regime regime = Regime::small_d;
  std::optional<double> c;   // log_order_d: defaults to d / log n
  double sigma_fraction = 0.8;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::optional<double> ratio_lo;  // defaults: 0.8 single choice, 0.4 otherwise
  std::optional<double> ratio_hi;  // defaults: 1.3 single choice, 1.2 otherwise
  double below_factor = 0.5;
  double above_factor = 1.5;
  double p_stable_min = 0.9;
  double p_unstable_max = 0.1;
  bool check_p_sigma = true;
  RunOptions run;
};

struct BandCheckReport {
  AsymptoticPrediction prediction;
  ImbalanceEstimate imbalance;
  double reference = 0.0;
  double ratio = 0.0;
  double ratio_lo = 0.0;
  double ratio_hi = 0.0;
  bool band_pass = false;
  double b_below = 0.0;
  double b_above = 0.0;
  std::optional<MetricEstimate> p_below;
  std::optional<MetricEstimate> p_above;
  bool p_sigma_pass = true;
  bool pass() const { return band_pass && p_sigma_pass; }
};

BandCheckReport asymptotic_band_check(const Allocation& alloc, const BandCheckConfig& cfg);

}  // namespace dchoice
