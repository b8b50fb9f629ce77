#include "dchoice/spacings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dchoice {

namespace {

double loglog(std::size_t n) {
  if (n < 3) throw std::invalid_argument("iterated logarithm needs n >= 3, got " + std::to_string(n));
  return std::log(std::log(static_cast<double>(n)));
}

void check_window(std::size_t k, std::size_t w) {
  if (w == 0 || w > k)
    throw std::invalid_argument("window " + std::to_string(w) + " outside [1, " + std::to_string(k) + "]");
}

}  // namespace

SpacingSample SpacingSample::from_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("spacing sample must be non-empty");
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) throw std::invalid_argument("spacings must be non-negative");
    sum += v;
  }
  return SpacingSample(std::move(values), sum);
}

SpacingSample sample_uniform_spacings(std::size_t k, double sigma, RandomStream& stream) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  std::vector<double> v(k);
  double total = 0.0;
  for (auto& e : v) {
    e = stream.exponential();
    total += e;
  }
  // keep the (e / total) * sigma order: sigma is then an exact scale factor
  for (auto& e : v) e = (e / total) * sigma;
  return SpacingSample(std::move(v), sigma);
}

std::vector<double> circular_window_sums(std::span<const double> values, std::size_t w) {
  const std::size_t k = values.size();
  check_window(k, w);
  // long double prefix sums over the doubled sequence; every window is one difference
  std::vector<long double> prefix(k + w + 1, 0.0L);
  for (std::size_t i = 0; i < k + w; ++i) prefix[i + 1] = prefix[i] + values[i % k];
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = static_cast<double>(prefix[i + w] - prefix[i]);
  return out;
}

double max_nonoverlapping_m_spacing(const SpacingSample& sample, std::size_t m) {
  const std::size_t k = sample.k();
  if (m == 0 || k % m != 0)
    throw std::invalid_argument("m = " + std::to_string(m) + " does not divide k = " + std::to_string(k));
  double best = 0.0;
  for (std::size_t b = 0; b < k; b += m) {
    double s = 0.0;
    for (std::size_t j = b; j < b + m; ++j) s += sample[j];
    best = std::max(best, s);
  }
  return best;
}

double max_d_spacing_line(const SpacingSample& sample, std::size_t d) {
  auto w = circular_window_sums(sample.values(), d);
  return *std::max_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(sample.k() - d + 1));
}

double max_d_spacing_circle(const SpacingSample& sample, std::size_t d) {
  auto w = circular_window_sums(sample.values(), d);
  return *std::max_element(w.begin(), w.end());
}

std::size_t count_spacings_in_range(const SpacingSample& sample, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("count_spacings_in_range: lo > hi");
  return static_cast<std::size_t>(std::count_if(sample.values().begin(), sample.values().end(),
                                                [&](double s) { return lo <= s && s <= hi; }));
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double gumbel_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gumbel_quantile needs p in (0, 1)");
  return -std::log(-std::log(p));
}

double solve_alpha(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("solve_alpha needs c > 0");
  // g(a) = log(1+a) - a + 1/c is strictly decreasing on a > 0 with g(0) = 1/c > 0
  auto g = [c](double a) { return std::log1p(a) - a + 1.0 / c; };
  double lo = 0.0, hi = 1.0;
  while (g(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  double a = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    double step = g(a) / (1.0 / (1.0 + a) - 1.0);
    double next = a - step;
    if (next <= lo || next >= hi) break;
    a = next;
  }
  return a;
}

double sigma_from_b(std::size_t n, double b) {
  if (n < 2) throw std::invalid_argument("sigma_from_b needs n >= 2");
  return b * static_cast<double>(n) / std::log(static_cast<double>(n));
}

AsymptoticPrediction predict_single_choice(std::size_t n, std::size_t m) {
  if (m == 0) throw std::invalid_argument("m must be positive");
  const double ll = loglog(n);
  const double md = static_cast<double>(m);
  const double f_n = (md - 1.0) * ll - std::lgamma(md);
  AsymptoticPrediction p;
  p.regime = Regime::fixed_m_single_choice;
  p.centering = std::log(static_cast<double>(n)) + f_n;
  p.scale = 1.0;
  p.band_lo = (p.centering + gumbel_quantile(0.025)) / md;
  p.band_hi = (p.centering + gumbel_quantile(0.975)) / md;
  p.b_stable_below = md;
  p.b_unstable_above = md;
  return p;
}

namespace {

struct LogOrder {
  double alpha;
  double tau;
};

LogOrder log_order_constants(std::optional<double> c) {
  if (!c) throw std::invalid_argument("log_order_d regime requires c");
  double a = solve_alpha(*c);
  return {a, *c * (1.0 + a) * (1.0 + a) / a};
}

}  // namespace

AsymptoticPrediction predict_d_choice(std::size_t n, std::size_t d, Regime regime,
                                      std::optional<double> c) {
  if (d == 0) throw std::invalid_argument("d must be positive");
  const double ll = loglog(n);
  const double ln = std::log(static_cast<double>(n));
  const double dd = static_cast<double>(d);
  AsymptoticPrediction p;
  p.regime = regime;
  if (regime == Regime::small_d) {
    const double B = ln + (dd - 1.0) * (1.0 + ll - std::log(dd));
    if (!(B > 0.0))
      throw std::invalid_argument("small-d prediction has a non-positive centering for n = " + std::to_string(n) +
                                  ", d = " + std::to_string(d));
    p.centering = B;
    p.scale = 1.0;
    p.band_lo = B / (2.0 * dd);
    p.band_hi = B / dd;
    p.b_stable_below = dd;
    p.b_unstable_above = 2.0 * dd;
  } else if (regime == Regime::log_order_d) {
    auto lo = log_order_constants(c);
    p.alpha = lo.alpha;
    p.tau = lo.tau;
    // 1/6 <= 2c a / (3(a+1)) * I log n / loglog n <= 1
    const double K = 3.0 * (lo.alpha + 1.0) / (2.0 * *c * lo.alpha) * ll / ln;
    p.centering = K;
    p.scale = ll / ln;
    p.band_lo = K / 6.0;
    p.band_hi = K;
    p.b_stable_below = dd / (1.5 * lo.tau);
    p.b_unstable_above = dd / (0.25 * lo.tau);
  } else {
    throw std::invalid_argument("predict_d_choice: regime must be small_d or log_order_d");
  }
  return p;
}

AsymptoticPrediction predict_xor(std::size_t n, std::size_t d, std::size_t r, Regime regime,
                                 std::optional<double> c) {
  if (r < 2) throw std::invalid_argument("predict_xor needs r >= 2");
  if (d == 0) throw std::invalid_argument("d must be positive");
  const double ll = loglog(n);
  const double ln = std::log(static_cast<double>(n));
  const double dd = static_cast<double>(d);
  const double rr = static_cast<double>(r);
  AsymptoticPrediction p;
  p.regime = regime;
  if (regime == Regime::small_d) {
    const double beta = rr * (dd - 1.0) * (1.0 + ll - std::log(1.0 + rr * (dd - 1.0)));
    p.centering = ln + beta;
    if (!(p.centering > 0.0))
      throw std::invalid_argument("small-d XOR prediction has a non-positive centering for n = " +
                                  std::to_string(n) + ", d = " + std::to_string(d));
    p.scale = 1.0;
    p.band_lo = p.centering / (2.0 * dd);
    p.band_hi = p.centering / dd;
    p.b_stable_below = dd;
    p.b_unstable_above = 2.0 * dd;
  } else if (regime == Regime::log_order_d) {
    auto lo = log_order_constants(c);
    p.alpha = lo.alpha;
    p.tau = lo.tau;
    const double X = (lo.alpha + 1.0) * (3.0 / (2.0 * *c * lo.alpha) * ll / ln + rr);
    p.centering = X;
    p.scale = 1.0;
    p.band_lo = X / 2.0;
    p.band_hi = X;
    p.b_stable_below = dd / (1.5 * lo.tau);
    p.b_unstable_above = dd / (0.25 * lo.tau);
  } else {
    throw std::invalid_argument("predict_xor: regime must be small_d or log_order_d");
  }
  return p;
}

}  // namespace dchoice
