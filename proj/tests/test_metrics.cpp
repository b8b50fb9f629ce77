#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dchoice/allocation.hpp"
#include "dchoice/errors.hpp"
#include "dchoice/exact_k3.hpp"
#include "dchoice/loadsolver.hpp"
#include "dchoice/metrics.hpp"
#include "oracles.hpp"

using namespace dchoice;

namespace {

constexpr double kEulerGamma = 0.57721566490153286;

}  // namespace

TEST(ExactK3, SectionExampleValues) {
  EXPECT_NEAR(exact_P_sigma_k3(build_cyclic(3, 1), 3.0), 0.0, 1e-12);
  EXPECT_NEAR(exact_P_sigma_k3(build_cyclic(3, 2), 3.0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(exact_P_sigma_k3(build_cyclic(3, 3), 3.0), 1.0, 1e-12);
  EXPECT_NEAR(exact_P_sigma_k3(build_cyclic(3, 2), 1.5), 1.0, 1e-12);
}

TEST(ExactK3, HexagonVertices) {
  auto region = exact_region_k3(build_cyclic(3, 2), 3.0);
  ASSERT_EQ(region.polygon.size(), 6u);
  std::set<std::array<long, 3>> got;
  for (const auto& v : region.polygon) got.insert({std::lround(v[0]), std::lround(v[1]), std::lround(v[2])});
  std::set<std::array<long, 3>> expected = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  EXPECT_EQ(got, expected);
  for (const auto& v : region.polygon)
    for (double x : v) EXPECT_NEAR(x, std::round(x), 1e-12);
  EXPECT_EQ(region.halfspaces.size(), 10u);
}

TEST(ExactK3, SinglePointForSingleChoice) {
  auto region = exact_region_k3(build_cyclic(3, 1), 3.0);
  ASSERT_EQ(region.polygon.size(), 1u);
  for (double x : region.polygon[0]) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(ExactK3, Unsupported) {
  EXPECT_THROW(exact_P_sigma_k3(build_cyclic(4, 2), 3.0), UnsupportedError);
  EXPECT_THROW(exact_P_sigma_k3(build_cyclic_xor(3, 2, 2), 3.0), UnsupportedError);
}

TEST(ExactK3, AgreesWithMonteCarlo) {
  for (std::size_t d = 1; d <= 3; ++d)
    for (double sigma : {1.5, 2.4, 3.0}) {
      auto a = build_cyclic(3, d);
      auto est = estimate_P_sigma(a, sigma, 20000, 41);
      const double exact = exact_P_sigma_k3(a, sigma);
      EXPECT_LE(std::abs(est.mean - exact), 3.0 * est.std_error + 1e-12) << "d=" << d << " sigma=" << sigma;
    }
}

TEST(ExactK3, SmallSigmaByBruteForce) {
  // every sampled demand at sigma 1.5 is routable
  auto a = build_cyclic(3, 2);
  auto loads = simulate_max_loads(a, 1.5, 100000, 42);
  EXPECT_TRUE(std::all_of(loads.begin(), loads.end(), [](double t) { return t <= 1.0 + kStabilityTol; }));
}

TEST(EstimateP, SectionExampleByMonteCarlo) {
  auto est = estimate_P_sigma(build_cyclic(3, 2), 3.0, 20000, 43);
  EXPECT_NEAR(est.mean, 2.0 / 3.0, 3.0 * est.std_error);
  EXPECT_EQ(estimate_P_sigma(build_cyclic(3, 1), 3.0, 2000, 43).mean, 0.0);
  EXPECT_EQ(estimate_P_sigma(build_cyclic(3, 3), 3.0, 2000, 43).mean, 1.0);
}

TEST(EstimateP, NonIncreasingInSigma) {
  auto a = build_cyclic(20, 3);
  double prev = 1.0, prev_se = 0.0;
  for (double sigma : {6.0, 10.0, 14.0, 18.0}) {
    auto est = estimate_P_sigma(a, sigma, 2000, 44);
    EXPECT_LE(est.mean, prev + 3.0 * std::max(est.std_error, prev_se));
    prev = est.mean;
    prev_se = est.std_error;
  }
}

TEST(EstimateP, NonDecreasingInChoicesOnPairedSeeds) {
  double prev_p = -1.0, prev_i = 1e300;
  for (std::size_t d = 1; d <= 4; ++d) {
    auto a = build_cyclic(30, d);
    auto p = estimate_P_sigma(a, 15.0, 2000, 45);
    auto i = estimate_I(a, 15.0, 2000, 45);
    EXPECT_GE(p.mean, prev_p);
    EXPECT_LE(i.mean, prev_i);
    prev_p = p.mean;
    prev_i = i.mean;
  }
}

TEST(EstimateI, FullReplicationIsOne) {
  auto est = estimate_I(build_cyclic(4, 4), 2.7, 500, 46);
  EXPECT_NEAR(est.mean, 1.0, 1e-9);
  EXPECT_NEAR(est.std_error, 0.0, 1e-9);
  EXPECT_LE(est.ci95_lo, est.mean);
  EXPECT_GE(est.ci95_hi, est.mean);
}

TEST(EstimateI, SingleChoiceMean) {
  auto est = estimate_I(build_single_choice(100, 1), 80.0, 10000, 47);
  const double expected = std::log(100.0) + kEulerGamma;
  EXPECT_NEAR(est.mean, expected, 0.05 * expected);
  EXPECT_LE(est.q05, est.q50);
  EXPECT_LE(est.q50, est.q95);
}

TEST(EstimateI, TwoChoicesBeatOne) {
  auto one = estimate_I(build_cyclic(100, 1), 80.0, 1000, 48);
  auto two = estimate_I(build_cyclic(100, 2), 80.0, 1000, 48);
  EXPECT_LT(two.mean, one.mean);
}

TEST(Simulate, DeterministicAcrossThreadCounts) {
  for (const auto& a : {build_cyclic(50, 3), build_cyclic_xor(20, 3, 2)}) {
    auto one = simulate_max_loads(a, 40.0, 300, 49, {1});
    auto three = simulate_max_loads(a, 40.0, 300, 49, {3});
    auto eight = simulate_max_loads(a, 40.0, 300, 49, {8});
    EXPECT_EQ(one, three);
    EXPECT_EQ(one, eight);
  }
}

TEST(Simulate, PairedSeedsShareDemand) {
  // single choice loads are window maxima of the same demand draws
  auto ones = simulate_max_loads(build_single_choice(10, 1), 5.0, 50, 50);
  for (std::size_t t = 0; t < 50; ++t) {
    RandomStream s(50, t);
    auto demand = sample_uniform_spacings(10, 5.0, s);
    EXPECT_EQ(ones[t], *std::max_element(demand.values().begin(), demand.values().end()));
  }
}

TEST(ParallelMap, RethrowsLowestFailure) {
  auto fn = [](std::size_t i) -> double {
    if (i == 7 || i == 30) throw std::runtime_error("bad " + std::to_string(i));
    return static_cast<double>(i);
  };
  try {
    parallel_map(50, fn, {4});
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(Summaries, WilsonInterval) {
  std::vector<double> all_stable(100, 0.5);
  auto p = summarize_stability(all_stable, 1);
  EXPECT_EQ(p.mean, 1.0);
  EXPECT_EQ(p.ci95_hi, 1.0);
  EXPECT_LT(p.ci95_lo, 1.0);
  EXPECT_GT(p.ci95_lo, 0.95);
  std::vector<double> half(200, 0.5);
  for (std::size_t i = 0; i < 100; ++i) half[i] = 2.0;
  auto q = summarize_stability(half, 1);
  EXPECT_EQ(q.mean, 0.5);
  // Wilson: center 0.5, half-width z sqrt(p(1-p)/n + z^2/4n^2) / (1 + z^2/n)
  const double z = 1.959963984540054, n = 200;
  const double hw = z * std::sqrt(0.25 / n + z * z / (4 * n * n)) / (1 + z * z / n);
  EXPECT_NEAR(q.ci95_lo, 0.5 - hw, 1e-12);
  EXPECT_NEAR(q.ci95_hi, 0.5 + hw, 1e-12);
  EXPECT_NEAR(q.std_error, std::sqrt(0.25 / n), 1e-12);
}

TEST(Summaries, QuantileType7) {
  std::vector<double> v = {4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
}

TEST(Summaries, KsDistance) {
  std::vector<double> v = {0.1, 0.2, 0.3, 0.4};
  auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  // F_n jumps to 1 at 0.4 while F(0.4) = 0.4
  EXPECT_NEAR(ks_distance(v, uniform), 0.6, 1e-12);
}

TEST(BandCheck, SingleChoice) {
  BandCheckConfig cfg;
  cfg.regime = Regime::fixed_m_single_choice;
  cfg.trials = 2000;
  auto rep = asymptotic_band_check(build_single_choice(100, 1), cfg);
  EXPECT_TRUE(rep.band_pass) << rep.ratio;
  EXPECT_DOUBLE_EQ(rep.ratio_lo, 0.8);
  EXPECT_DOUBLE_EQ(rep.ratio_hi, 1.3);
  EXPECT_TRUE(rep.pass());
}

TEST(BandCheck, CyclicSmallD) {
  BandCheckConfig cfg;
  cfg.trials = 300;
  auto rep = asymptotic_band_check(build_cyclic(100, 3), cfg);
  EXPECT_NEAR(rep.reference, 7.46230 / 3.0, 1e-4);
  EXPECT_TRUE(rep.band_pass) << rep.ratio;
  ASSERT_TRUE(rep.p_below && rep.p_above);
  EXPECT_GE(rep.p_below->mean, 0.9);
  EXPECT_LE(rep.p_above->mean, 0.1);
  EXPECT_TRUE(rep.pass());
}
