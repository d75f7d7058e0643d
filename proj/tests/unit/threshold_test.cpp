#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "zsmat/errors.hpp"
#include "zsmat/threshold.hpp"

using namespace zsmat;

namespace {

std::vector<double> bimodal(std::uint64_t seed, std::size_t n, double lo = 0.25, double hi = 0.75,
                            double spread = 0.06) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pick(0.5);
  std::normal_distribution<double> a(lo, spread), b(hi, spread);
  std::vector<double> s(n);
  for (auto& v : s) v = std::clamp(pick(rng) ? b(rng) : a(rng), 0.0, 1.0);
  return s;
}

ThresholdConfig no_offset() {
  ThresholdConfig c;
  c.delta = 0.0;
  return c;
}

}  // namespace

TEST(TwoMeans, SpecExamples) {
  const std::vector<double> s{0.1, 0.1, 0.9, 0.9};
  const auto r = two_means_1d(s);
  EXPECT_DOUBLE_EQ(r.mu1, 0.1);
  EXPECT_DOUBLE_EQ(r.mu2, 0.9);
  EXPECT_EQ(r.n1, 2u);
  EXPECT_EQ(r.n2, 2u);
  const std::vector<double> two{0.8, 0.2};
  const auto t = two_means_1d(two);
  EXPECT_DOUBLE_EQ(t.mu1, 0.2);
  EXPECT_DOUBLE_EQ(t.mu2, 0.8);
  EXPECT_EQ(t.n1, 1u);
}

TEST(TwoMeans, NarrowModesSplitBetweenThem) {
  const auto s = bimodal(3, 500, 0.15, 0.85, 0.02);
  const auto r = two_means_1d(s);
  EXPECT_LT(r.low_max, 0.5);
  EXPECT_GT(r.high_min, 0.5);
}

TEST(TwoMeans, MatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto s = bimodal(seed, 120, 0.2 + 0.005 * seed, 0.7, 0.08);
    const auto r = two_means_1d(s);
    const auto o = oracle::best_split(s);
    EXPECT_EQ(r.n1, o.n1) << seed;
    EXPECT_EQ(r.n2, o.n2) << seed;
    EXPECT_EQ(r.low_max, o.low_max) << seed;
    EXPECT_EQ(r.high_min, o.high_min) << seed;
    EXPECT_NEAR(r.mu1, o.mu1, 1e-12);
    EXPECT_NEAR(r.mu2, o.mu2, 1e-12);
  }
}

TEST(TwoMeans, DegenerateInputThrows) {
  const std::vector<double> same{0.7, 0.7, 0.7};
  EXPECT_THROW(two_means_1d(same), DegenerateDistribution);
  const std::vector<double> one{0.7};
  EXPECT_THROW(two_means_1d(one), DegenerateDistribution);
}

TEST(AdaptiveThreshold, SpecExamples) {
  const std::vector<double> s{0.1, 0.1, 0.9, 0.9};
  EXPECT_DOUBLE_EQ(adaptive_threshold(s, no_offset()), 0.5);
  EXPECT_DOUBLE_EQ(adaptive_threshold(s, ThresholdConfig{}), 0.6);
  const std::vector<double> same(10, 0.7);
  EXPECT_DOUBLE_EQ(adaptive_threshold(same, ThresholdConfig{}), 0.4);
}

TEST(AdaptiveThreshold, CentroidRuleIsTheWeightedMean) {
  ThresholdConfig c = no_offset();
  c.rule = ThresholdRule::WeightedCentroid;
  const std::vector<double> s{0.1, 0.1, 0.9, 0.9};
  EXPECT_DOUBLE_EQ(adaptive_threshold(s, c), 0.5);
  const std::vector<double> skew{0.1, 0.2, 0.3, 0.9};
  EXPECT_NEAR(adaptive_threshold(skew, c), 0.375, 1e-12);
}

TEST(AdaptiveThreshold, FloorAndFallback) {
  ThresholdConfig c;
  const std::vector<double> low{0.01, 0.02, 0.03};
  const auto r = compute_threshold(low, c);
  EXPECT_FALSE(r.clustered);
  EXPECT_EQ(r.admitted, 0u);
  EXPECT_DOUBLE_EQ(r.tau, c.fallback);
  EXPECT_DOUBLE_EQ(adaptive_threshold({}, c), c.fallback);
}

TEST(AdaptiveThreshold, ClampedToUnitInterval) {
  ThresholdConfig c;
  c.delta = 1.0;
  const std::vector<double> s{0.1, 0.1, 0.9, 0.9};
  EXPECT_DOUBLE_EQ(adaptive_threshold(s, c), 1.0);
}

TEST(AdaptiveThreshold, RejectsOutOfRangeScores) {
  const std::vector<double> bad{0.2, 1.2};
  EXPECT_THROW(adaptive_threshold(bad, ThresholdConfig{}), ValidationError);
  const std::vector<double> nan{0.2, std::nan("")};
  EXPECT_THROW(adaptive_threshold(nan, ThresholdConfig{}), ValidationError);
}

TEST(AdaptiveThreshold, InvalidConfigRejected) {
  ThresholdConfig c;
  c.floor = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ThresholdConfig{};
  c.delta = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(AdaptiveThreshold, ShiftEquivariant) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto s = bimodal(seed, 300, 0.3, 0.65, 0.04);
    for (auto& v : s) v = std::clamp(v, 0.1, 0.85);
    const double c = 0.1;
    auto shifted = s;
    for (auto& v : shifted) v += c;
    const double t0 = adaptive_threshold(s, no_offset());
    const double t1 = adaptive_threshold(shifted, no_offset());
    EXPECT_LT(std::abs(t1 - t0 - c), 1e-9) << seed;
  }
}

TEST(AdaptiveThreshold, PermutationInvariant) {
  auto s = bimodal(4, 200);
  const double t = adaptive_threshold(s, ThresholdConfig{});
  std::mt19937_64 rng(1);
  std::shuffle(s.begin(), s.end(), rng);
  EXPECT_EQ(adaptive_threshold(s, ThresholdConfig{}), t);
}

TEST(Otsu, SpecExamples) {
  std::vector<double> deltas;
  for (int i = 0; i < 50; ++i) {
    deltas.push_back(0.2);
    deltas.push_back(0.8);
  }
  const double t = otsu_threshold(deltas, 256);
  EXPECT_GT(t, 0.2);
  EXPECT_LT(t, 0.8);

  const std::vector<double> s{0.1, 0.1, 0.9, 0.9};
  EXPECT_NEAR(otsu_threshold(s, 256), 0.5, 1.0 / 256);

  const std::vector<double> same(20, 0.4);
  EXPECT_THROW(otsu_threshold(same, 256), DegenerateDistribution);
  EXPECT_THROW(otsu_threshold(s, 1), std::invalid_argument);
}

TEST(Otsu, AgreesWithAdaptiveAtZeroOffset) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto s = bimodal(seed, 500);
    EXPECT_LE(std::abs(adaptive_threshold(s, no_offset()) - otsu_threshold(s, 1024)), 2.0 / 1024) << seed;
  }
}

TEST(Histogram, CountsAndClusterLabels) {
  const std::vector<double> s{0.05, 0.15, 0.95, 1.0};
  const auto h = score_histogram(s, 10, 0.5);
  ASSERT_EQ(h.size(), 10u);
  EXPECT_EQ(h[0].count, 1u);
  EXPECT_EQ(h[1].count, 1u);
  EXPECT_EQ(h[9].count, 2u);
  EXPECT_EQ(h[4].cluster, 1);
  EXPECT_EQ(h[5].cluster, 2);
  EXPECT_EQ(score_histogram(s, 4, -1.0)[0].cluster, 0);
}

TEST(StreamingThreshold, ConvergesToBatchValue) {
  const auto s = bimodal(8, 400);
  StreamingThreshold st{ThresholdConfig{}};
  EXPECT_DOUBLE_EQ(st.current(), 0.4);
  for (std::size_t i = 0; i < s.size(); i += 40) {
    st.update(std::span<const double>(s).subspan(i, 40));
  }
  EXPECT_EQ(st.seen(), s.size());
  EXPECT_DOUBLE_EQ(st.current(), adaptive_threshold(s, ThresholdConfig{}));
}
