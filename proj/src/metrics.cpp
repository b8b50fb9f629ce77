#include "dchoice/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "dchoice/errors.hpp"
#include "dchoice/loadsolver.hpp"
#include "dchoice/random_stream.hpp"

namespace dchoice {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kEulerGamma = 0.5772156649015329;

}  // namespace

std::vector<double> parallel_map(std::size_t count, const std::function<double(std::size_t)>& fn,
                                 const RunOptions& opt) {
  std::vector<double> out(count);
  std::size_t threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = count;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (i > failed_at) return;
      }
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<double> simulate_max_loads(const Allocation& alloc, double sigma, std::size_t trials,
                                       std::uint64_t seed, const RunOptions& opt) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const AllocationMatrices m = to_matrices(alloc);
  return parallel_map(
      trials,
      [&](std::size_t i) {
        RandomStream stream(seed, i);
        const auto sample = sample_uniform_spacings(alloc.k, sigma, stream);
        try {
          return optimal_max_load(alloc, m, sample.values());
        } catch (const NumericalFailure& e) {
          throw NumericalFailure("trial " + std::to_string(i) + ": " + e.what());
        }
      },
      opt);
}

MetricEstimate summarize_stability(const std::vector<double>& max_loads, std::uint64_t seed) {
  if (max_loads.empty()) throw std::invalid_argument("no trials");
  const double N = static_cast<double>(max_loads.size());
  std::size_t stable = 0;
  for (double t : max_loads) stable += exact_verdict(t).stable ? 1 : 0;
  const double p = static_cast<double>(stable) / N;
  MetricEstimate e;
  e.mean = p;
  e.std_error = std::sqrt(p * (1.0 - p) / N);
  const double z2 = kZ95 * kZ95;
  const double centre = (p + z2 / (2.0 * N)) / (1.0 + z2 / N);
  const double half = kZ95 / (1.0 + z2 / N) * std::sqrt(p * (1.0 - p) / N + z2 / (4.0 * N * N));
  e.ci95_lo = std::max(0.0, std::min(p, centre - half));
  e.ci95_hi = std::min(1.0, std::max(p, centre + half));
  e.trials = max_loads.size();
  e.seed = seed;
  return e;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ImbalanceEstimate summarize_imbalance(const std::vector<double>& max_loads, std::size_t n, double sigma,
                                      std::uint64_t seed) {
  if (max_loads.empty()) throw std::invalid_argument("no trials");
  std::vector<double> I(max_loads.size());
  for (std::size_t i = 0; i < I.size(); ++i) I[i] = max_loads[i] * static_cast<double>(n) / sigma;
  double sum = 0.0;
  for (double v : I) sum += v;
  const double N = static_cast<double>(I.size());
  const double mean = sum / N;
  double ss = 0.0;
  for (double v : I) ss += (v - mean) * (v - mean);
  ImbalanceEstimate e;
  e.mean = mean;
  e.std_error = I.size() > 1 ? std::sqrt(ss / (N - 1.0) / N) : 0.0;
  e.ci95_lo = mean - kZ95 * e.std_error;
  e.ci95_hi = mean + kZ95 * e.std_error;
  e.trials = I.size();
  e.seed = seed;
  e.q05 = quantile(I, 0.05);
  e.q50 = quantile(I, 0.5);
  e.q95 = quantile(I, 0.95);
  return e;
}

MetricEstimate estimate_P_sigma(const Allocation& alloc, double sigma, std::size_t trials, std::uint64_t seed,
                                const RunOptions& opt) {
  return summarize_stability(simulate_max_loads(alloc, sigma, trials, seed, opt), seed);
}

ImbalanceEstimate estimate_I(const Allocation& alloc, double sigma, std::size_t trials, std::uint64_t seed,
                             const RunOptions& opt) {
  return summarize_imbalance(simulate_max_loads(alloc, sigma, trials, seed, opt), alloc.n, sigma, seed);
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_distance of empty sample");
  std::sort(sample.begin(), sample.end());
  const double N = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / N - F, F - static_cast<double>(i) / N});
  }
  return d;
}

BandCheckReport asymptotic_band_check(const Allocation& alloc, const BandCheckConfig& cfg) {
  BandCheckReport rep;
  const bool single = alloc.is_replica() && alloc.d == 1;
  std::optional<double> c = cfg.c;
  if (cfg.regime == Regime::log_order_d && !c)
    c = static_cast<double>(alloc.d) / std::log(static_cast<double>(alloc.n));
  if (single) {
    rep.prediction = predict_single_choice(alloc.n, alloc.k / alloc.n);
    rep.reference = (rep.prediction.centering + kEulerGamma) / static_cast<double>(alloc.k / alloc.n);
  } else if (alloc.is_replica()) {
    rep.prediction = predict_d_choice(alloc.n, alloc.d, cfg.regime, c);
    rep.reference = rep.prediction.band_hi;
  } else {
    rep.prediction = predict_xor(alloc.n, alloc.d, alloc.r, cfg.regime, c);
    rep.reference = rep.prediction.band_hi;
  }
  rep.ratio_lo = cfg.ratio_lo.value_or(single ? 0.8 : 0.4);
  rep.ratio_hi = cfg.ratio_hi.value_or(single ? 1.3 : 1.2);

  const double sigma = cfg.sigma_fraction * static_cast<double>(alloc.n);
  rep.imbalance = estimate_I(alloc, sigma, cfg.trials, cfg.seed, cfg.run);
  rep.ratio = rep.imbalance.mean / rep.reference;
  rep.band_pass = rep.ratio >= rep.ratio_lo && rep.ratio <= rep.ratio_hi;

  rep.b_below = cfg.below_factor * rep.prediction.b_stable_below;
  rep.b_above = cfg.above_factor * rep.prediction.b_unstable_above;
  if (cfg.check_p_sigma) {
    rep.p_below = estimate_P_sigma(alloc, sigma_from_b(alloc.n, rep.b_below), cfg.trials, cfg.seed, cfg.run);
    rep.p_above = estimate_P_sigma(alloc, sigma_from_b(alloc.n, rep.b_above), cfg.trials, cfg.seed, cfg.run);
    rep.p_sigma_pass = rep.p_below->mean >= cfg.p_stable_min && rep.p_above->mean <= cfg.p_unstable_max;
  }
  return rep;
}

}  // namespace dchoice
