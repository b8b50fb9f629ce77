#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dchoice/metrics.hpp"
#include "dchoice/random_stream.hpp"
#include "dchoice/spacings.hpp"
#include "oracles.hpp"

using namespace dchoice;

namespace {

SpacingSample S(std::vector<double> v) { return SpacingSample::from_values(std::move(v)); }

}  // namespace

TEST(Sampling, SingleSpacingIsWholeInterval) {
  RandomStream s(3, 0);
  auto x = sample_uniform_spacings(1, 1.0, s);
  ASSERT_EQ(x.k(), 1u);
  EXPECT_EQ(x[0], 1.0);
}

TEST(Sampling, Deterministic) {
  RandomStream a(11, 4), b(11, 4);
  auto x = sample_uniform_spacings(3, 2.0, a);
  auto y = sample_uniform_spacings(3, 2.0, b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(x[i], y[i]);
}

TEST(Sampling, SumsToSigmaAndNonNegative) {
  for (std::uint64_t t = 0; t < 200; ++t) {
    RandomStream s(5, t);
    const double sigma = 0.1 + static_cast<double>(t);
    auto x = sample_uniform_spacings(50, sigma, s);
    double sum = 0.0;
    for (double v : x.values()) {
      ASSERT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, sigma, 1e-12 * sigma);
    EXPECT_EQ(x.sigma(), sigma);
  }
}

TEST(Sampling, SigmaIsExactScale) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    RandomStream a(8, t), b(8, t);
    auto unit = sample_uniform_spacings(20, 1.0, a);
    auto big = sample_uniform_spacings(20, 7.25, b);
    for (std::size_t i = 0; i < 20; ++i) ASSERT_EQ(big[i], unit[i] * 7.25);
  }
}

TEST(Sampling, RejectsBadArguments) {
  RandomStream s(1, 1);
  EXPECT_THROW(sample_uniform_spacings(0, 1.0, s), std::invalid_argument);
  EXPECT_THROW(sample_uniform_spacings(3, 0.0, s), std::invalid_argument);
  EXPECT_THROW(sample_uniform_spacings(3, -1.0, s), std::invalid_argument);
}

TEST(Sampling, CoordinateMeansAreOneOverK) {
  const int N = 1000000;
  std::vector<double> sum(4, 0.0), sq(4, 0.0);
  for (int t = 0; t < N; ++t) {
    RandomStream s(2024, static_cast<std::uint64_t>(t));
    auto x = sample_uniform_spacings(4, 1.0, s);
    for (int i = 0; i < 4; ++i) {
      sum[i] += x[i];
      sq[i] += x[i] * x[i];
    }
  }
  for (int i = 0; i < 4; ++i) {
    const double mean = sum[i] / N;
    const double se = std::sqrt((sq[i] / N - mean * mean) / N);
    EXPECT_NEAR(mean, 0.25, 3.0 * se) << "coordinate " << i;
  }
}

TEST(NonOverlapping, Examples) {
  EXPECT_DOUBLE_EQ(max_nonoverlapping_m_spacing(S({0.1, 0.2, 0.3, 0.4}), 2), 0.7);
  auto x = S({0.3, 0.1, 0.5, 0.1});
  EXPECT_DOUBLE_EQ(max_nonoverlapping_m_spacing(x, 4), x.sigma());
  EXPECT_THROW(max_nonoverlapping_m_spacing(x, 3), std::invalid_argument);
  EXPECT_THROW(max_nonoverlapping_m_spacing(x, 0), std::invalid_argument);
}

TEST(NonOverlapping, MaxSpacingMeanIsHarmonicNumber) {
  const int N = 1000000;
  const std::size_t k = 100;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < N; ++t) {
    RandomStream s(77, static_cast<std::uint64_t>(t));
    const double v = max_nonoverlapping_m_spacing(sample_uniform_spacings(k, 1.0, s), 1) * static_cast<double>(k);
    sum += v;
    sq += v * v;
  }
  double H = 0.0;
  for (std::size_t i = 1; i <= k; ++i) H += 1.0 / static_cast<double>(i);
  const double mean = sum / N;
  const double se = std::sqrt((sq / N - mean * mean) / N);
  EXPECT_NEAR(mean, H, 3.0 * se);
}

TEST(LineWindow, Examples) {
  EXPECT_DOUBLE_EQ(max_d_spacing_line(S({0.4, 0.1, 0.1, 0.4}), 2), 0.5);
  EXPECT_DOUBLE_EQ(max_d_spacing_line(S({0.1, 0.2, 0.3, 0.4}), 3), 0.9);
  auto x = S({0.2, 0.3, 0.5});
  EXPECT_DOUBLE_EQ(max_d_spacing_line(x, 3), x.sigma());
  EXPECT_THROW(max_d_spacing_line(x, 4), std::invalid_argument);
  EXPECT_THROW(max_d_spacing_line(x, 0), std::invalid_argument);
}

TEST(CircleWindow, Examples) {
  EXPECT_DOUBLE_EQ(max_d_spacing_circle(S({0.4, 0.1, 0.1, 0.4}), 2), 0.8);
  EXPECT_DOUBLE_EQ(max_d_spacing_circle(S({0.1, 0.2, 0.3, 0.4}), 2), 0.7);
  auto x = S({0.25, 0.05, 0.4, 0.3});
  EXPECT_EQ(max_d_spacing_circle(x, 1), max_d_spacing_line(x, 1));
  EXPECT_THROW(max_d_spacing_circle(x, 5), std::invalid_argument);
}

TEST(Windows, AgreeWithDirectSummationAndCircleDominates) {
  for (std::uint64_t t = 0; t < 300; ++t) {
    RandomStream s(31, t);
    const std::size_t k = 5 + t % 40;
    auto x = sample_uniform_spacings(k, 3.0, s);
    std::vector<double> v(x.values().begin(), x.values().end());
    for (std::size_t d = 1; d <= k; d += 1 + k / 7) {
      const double line = max_d_spacing_line(x, d);
      const double circ = max_d_spacing_circle(x, d);
      ASSERT_NEAR(line, oracle::window_max(v, d, false), 1e-13);
      ASSERT_NEAR(circ, oracle::window_max(v, d, true), 1e-13);
      ASSERT_GE(circ, line);
      // equality exactly when the best circular window does not wrap
      const auto sums = circular_window_sums(x.values(), d);
      const auto best = std::max_element(sums.begin(), sums.end()) - sums.begin();
      if (static_cast<std::size_t>(best) + d <= k) ASSERT_EQ(circ, line);
    }
  }
}

TEST(Windows, CircleDiffersRarely) {
  const std::size_t k = 100, d = 3;
  const int N = 20000;
  int differ = 0;
  for (int t = 0; t < N; ++t) {
    RandomStream s(12, static_cast<std::uint64_t>(t));
    auto x = sample_uniform_spacings(k, 1.0, s);
    differ += max_d_spacing_circle(x, d) != max_d_spacing_line(x, d);
  }
  const double p = static_cast<double>(differ) / N;
  const double bound = static_cast<double>(d) / static_cast<double>(k);
  EXPECT_LE(p, bound + 3.0 * std::sqrt(bound * (1 - bound) / N));
}

TEST(Count, Examples) {
  auto x = S({0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(count_spacings_in_range(x, 0.15, 0.35), 2u);
  EXPECT_EQ(count_spacings_in_range(x, 0.0, x.sigma()), 4u);
  EXPECT_THROW(count_spacings_in_range(x, 0.3, 0.2), std::invalid_argument);
}

TEST(Count, FullRangeAndMonotone) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    RandomStream s(4, t);
    auto x = sample_uniform_spacings(30, 2.0, s);
    EXPECT_EQ(count_spacings_in_range(x, 0.0, x.sigma()), 30u);
    EXPECT_LE(count_spacings_in_range(x, 0.05, 0.08), count_spacings_in_range(x, 0.04, 0.1));
  }
}

TEST(Count, SmallSpacingsArePoisson) {
  // N(1/k^2, 4/k^2) has mean close to beta - alpha = 3
  const std::size_t k = 1000;
  const int N = 100000;
  const double kk = static_cast<double>(k * k);
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < N; ++t) {
    RandomStream s(99, static_cast<std::uint64_t>(t));
    const double c = static_cast<double>(count_spacings_in_range(sample_uniform_spacings(k, 1.0, s), 1.0 / kk, 4.0 / kk));
    sum += c;
    sq += c * c;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sq / N - mean * mean) / N);
  EXPECT_NEAR(mean, 3.0, 3.0 * se);
}

TEST(Gumbel, Values) {
  EXPECT_NEAR(gumbel_cdf(0.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(gumbel_cdf(50.0), 1.0, 1e-15);
  EXPECT_NEAR(gumbel_cdf(-std::log(std::log(2.0))), 0.5, 1e-15);
  double prev = 0.0;
  for (double x = -5.0; x <= 10.0; x += 0.25) {
    EXPECT_GE(gumbel_cdf(x), prev);
    prev = gumbel_cdf(x);
  }
  EXPECT_NEAR(gumbel_cdf(gumbel_quantile(0.3)), 0.3, 1e-14);
}

TEST(Gumbel, MaxSpacingLimitLaw) {
  const std::size_t k = 10000;
  const int N = 10000;
  std::vector<double> v(N);
  for (int t = 0; t < N; ++t) {
    RandomStream s(2, static_cast<std::uint64_t>(t));
    v[t] = max_d_spacing_line(sample_uniform_spacings(k, 1.0, s), 1) * static_cast<double>(k) -
           std::log(static_cast<double>(k));
  }
  EXPECT_LE(ks_distance(v, gumbel_cdf), 0.02);
}

TEST(Alpha, MatchesBisectionOracle) {
  EXPECT_NEAR(solve_alpha(1.0), oracle::alpha_by_bisection(1.0), 1e-12);
  EXPECT_NEAR(solve_alpha(1.0), 2.1462, 5e-5);
  EXPECT_NEAR(solve_alpha(2.0), oracle::alpha_by_bisection(2.0), 1e-12);
  EXPECT_NEAR(solve_alpha(2.0), 1.3577, 5e-5);
}

TEST(Alpha, ResidualAndMonotone) {
  for (double c : {0.5, 1.0, 2.0}) {
    const double a = solve_alpha(c);
    EXPECT_GT(a, 0.0);
    EXPECT_NEAR((1.0 + a) * std::exp(-a) - std::exp(-1.0 / c), 0.0, 1e-12);
  }
  double prev = solve_alpha(0.05);
  for (double c = 0.1; c <= 20.0; c += 0.1) {
    const double a = solve_alpha(c);
    EXPECT_LT(a, prev);
    prev = a;
  }
  EXPECT_THROW(solve_alpha(0.0), std::invalid_argument);
  EXPECT_THROW(solve_alpha(-1.0), std::invalid_argument);
}

TEST(PredictSingle, Centering) {
  auto p = predict_single_choice(100, 1);
  EXPECT_NEAR(p.centering, std::log(100.0), 1e-12);
  EXPECT_EQ(p.scale, 1.0);
  EXPECT_EQ(p.regime, Regime::fixed_m_single_choice);
  // f_n = log log 100 at m = 2
  auto q = predict_single_choice(100, 2);
  EXPECT_NEAR(q.centering - std::log(100.0), 1.52718, 1e-5);
  EXPECT_NEAR(q.centering, 6.13235, 1e-5);
  for (std::size_t n : {3u, 15u, 1000u}) EXPECT_NEAR(predict_single_choice(n, 1).centering, std::log(double(n)), 1e-12);
  EXPECT_LE(q.band_lo, q.band_hi);
  EXPECT_THROW(predict_single_choice(2, 1), std::invalid_argument);
}

TEST(PredictDChoice, SmallD) {
  auto p1 = predict_d_choice(100, 1, Regime::small_d);
  EXPECT_NEAR(p1.band_lo, 2.3026, 5e-5);
  EXPECT_NEAR(p1.band_hi, 4.6052, 5e-5);
  auto p3 = predict_d_choice(100, 3, Regime::small_d);
  EXPECT_NEAR(p3.centering, 7.4623, 5e-5);
  EXPECT_NEAR(p3.band_lo, 1.2437, 5e-5);
  EXPECT_NEAR(p3.band_hi, 2.4874, 5e-5);
  EXPECT_THROW(predict_d_choice(3, 8, Regime::small_d), std::invalid_argument);
  for (std::size_t n : {10u, 100u, 10000u})
    for (std::size_t d = 1; d <= 8; ++d) {
      auto p = predict_d_choice(n, d, Regime::small_d);
      EXPECT_LE(p.band_lo, p.band_hi);
      EXPECT_GT(p.scale, 0.0);
    }
}

TEST(PredictDChoice, LogOrder) {
  EXPECT_THROW(predict_d_choice(1000, 7, Regime::log_order_d), std::invalid_argument);
  auto p = predict_d_choice(1000, 7, Regime::log_order_d, 1.0);
  ASSERT_TRUE(p.alpha && p.tau);
  EXPECT_NEAR((1 + *p.alpha) * std::exp(-*p.alpha), std::exp(-1.0), 1e-10);
  EXPECT_NEAR(*p.tau, (1 + *p.alpha) * (1 + *p.alpha) / *p.alpha, 1e-12);
  EXPECT_LE(p.band_lo, p.band_hi);
  EXPECT_NEAR(p.band_lo * 6.0, p.band_hi, 1e-12);
  EXPECT_GT(p.scale, 0.0);
}

TEST(PredictXor, SmallD) {
  auto p = predict_xor(100, 3, 2, Regime::small_d);
  EXPECT_NEAR(p.centering - std::log(100.0), 3.6710, 5e-5);
  EXPECT_NEAR(p.band_lo, 1.3794, 5e-5);
  EXPECT_NEAR(p.band_hi, 2.7587, 5e-5);
  EXPECT_DOUBLE_EQ(p.band_lo, p.band_hi / 2.0);
  for (std::size_t r : {2u, 3u, 5u}) EXPECT_NEAR(predict_xor(100, 1, r, Regime::small_d).centering, std::log(100.0), 1e-12);
  EXPECT_THROW(predict_xor(100, 3, 1, Regime::small_d), std::invalid_argument);
  auto q = predict_xor(1000, 7, 2, Regime::log_order_d, 1.0);
  EXPECT_LE(q.band_lo, q.band_hi);
  EXPECT_THROW(predict_xor(1000, 7, 2, Regime::log_order_d), std::invalid_argument);
}
