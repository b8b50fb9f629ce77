#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dchoice/random_stream.hpp"

namespace dchoice {

/// k non-negative demands (uniform spacings scaled to [0, sigma]) summing to
/// sigma. Index i is the demand of object i.
class SpacingSample {
 public:
  /// Wraps explicit values; sigma becomes their sum.
  static SpacingSample from_values(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t k() const noexcept { return values_.size(); }
  double sigma() const noexcept { return sigma_; }

 private:
  friend SpacingSample sample_uniform_spacings(std::size_t, double, RandomStream&);
  SpacingSample(std::vector<double> values, double sigma)
      : values_(std::move(values)), sigma_(sigma) {}

  std::vector<double> values_;
  double sigma_;
};

/// Draws a point uniformly from the simplex {s >= 0, sum s = sigma} by
/// normalising k unit exponentials. O(k), no sorting.
SpacingSample sample_uniform_spacings(std::size_t k, double sigma, RandomStream& stream);

/// All k circular window sums of width w: entry i is v[i] + ... + v[i+w-1]
/// (indices mod k). The first k-w+1 entries are the windows on the line.
std::vector<double> circular_window_sums(std::span<const double> values, std::size_t w);

/// Largest of the k/m disjoint blocks of m consecutive spacings.
double max_nonoverlapping_m_spacing(const SpacingSample& sample, std::size_t m);

/// Largest sum of d consecutive spacings on the line.
double max_d_spacing_line(const SpacingSample& sample, std::size_t d);

/// Largest sum of d consecutive spacings with wrap-around.
double max_d_spacing_circle(const SpacingSample& sample, std::size_t d);

/// Number of spacings s with lo <= s <= hi.
std::size_t count_spacings_in_range(const SpacingSample& sample, double lo, double hi);

/// Standard Gumbel CDF exp(-exp(-x)).
double gumbel_cdf(double x);

/// Inverse of gumbel_cdf on (0, 1).
double gumbel_quantile(double p);

/// Unique positive root of (1 + a) e^{-a} = e^{-1/c}.
double solve_alpha(double c);

enum class Regime { fixed_m_single_choice, small_d, log_order_d };

/// Closed-form asymptotic prediction for the imbalance factor.
///
/// `centering` and `scale` are reported in the coordinate the limit theorem is
/// stated in (I*m for single choice, I*d for small d, I*log n/loglog n for
/// log-order d); `band_lo`/`band_hi` are always in units of I itself.
/// `b_stable_below` / `b_unstable_above` are the thresholds on b for
/// Sigma = b n / log n below/above which P_Sigma tends to 1/0.
struct AsymptoticPrediction {
  double centering = 0.0;
  double scale = 1.0;
  Regime regime = Regime::small_d;
  std::optional<double> alpha;
  std::optional<double> tau;
  double band_lo = 0.0;
  double band_hi = 0.0;
  double b_stable_below = 0.0;
  double b_unstable_above = 0.0;
};

/// Single-choice allocation with m objects per node. The band is the central
/// 95% Gumbel interval of I*m around log n + f_n, divided by m.
AsymptoticPrediction predict_single_choice(std::size_t n, std::size_t m);

/// Clustering/cyclic d-choice allocations.
AsymptoticPrediction predict_d_choice(std::size_t n, std::size_t d, Regime regime,
                                      std::optional<double> c = std::nullopt);

/// d-choice allocations built with r-XOR recovery sets.
AsymptoticPrediction predict_xor(std::size_t n, std::size_t d, std::size_t r, Regime regime,
                                 std::optional<double> c = std::nullopt);

/// Sigma_n = b n / log n.
double sigma_from_b(std::size_t n, double b);

}  // namespace dchoice
