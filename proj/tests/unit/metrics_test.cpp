#include <random>

#include <gtest/gtest.h>

#include "minis.hpp"
#include "oracles.hpp"
#include "zsmat/errors.hpp"
#include "zsmat/metrics.hpp"

using namespace zsmat;

namespace {

TrackTable two_lanes(int frames) {
  TrackTable t;
  for (int f = 0; f < frames; ++f) {
    t.push_back(TrackRow{f, 1, BBox{10.0 + f, 10, 20, 20}});
    t.push_back(TrackRow{f, 2, BBox{10.0 + f, 60, 20, 20}});
  }
  return t;
}

TrackTable swapped_at(const TrackTable& gt, int frame) {
  TrackTable p = gt;
  for (auto& r : p) {
    r.id = r.frame < frame ? r.id + 10 : (r.id == 1 ? 12 : 11);
  }
  return p;
}

}  // namespace

TEST(Metrics, PerfectTracking) {
  const auto gt = two_lanes(30);
  const auto e = evaluate(gt, gt);
  EXPECT_EQ(e.hota, 1.0);
  EXPECT_EQ(e.deta, 1.0);
  EXPECT_EQ(e.assa, 1.0);
  EXPECT_EQ(e.loca, 1.0);
  EXPECT_EQ(e.idf1, 1.0);
  EXPECT_EQ(e.mota, 1.0);
  EXPECT_EQ(e.idsw, 0);
}

TEST(Metrics, EmptyPrediction) {
  const auto e = evaluate(two_lanes(30), {});
  EXPECT_EQ(e.deta, 0.0);
  EXPECT_EQ(e.hota, 0.0);
  EXPECT_EQ(e.mota, 0.0);
  EXPECT_EQ(e.idf1, 0.0);
}

TEST(Metrics, EmptyGroundTruth) {
  const auto e = evaluate({}, two_lanes(5));
  EXPECT_EQ(e.hota, 0.0);
  EXPECT_EQ(e.clr_fp, 10);
}

TEST(Metrics, MatchesBruteForceOnRandomMinis) {
  std::mt19937_64 rng(77);
  const auto alphas = default_alphas();
  for (int i = 0; i < 60; ++i) {
    const auto [gt, pred] = fixtures::random_mini(rng);
    const auto e = evaluate(gt, pred);
    const auto o = oracle::brute_hota(gt, pred, alphas);
    EXPECT_NEAR(e.hota, o.hota, 1e-6) << i;
    EXPECT_NEAR(e.deta, o.deta, 1e-6) << i;
    EXPECT_NEAR(e.assa, o.assa, 1e-6) << i;
    EXPECT_NEAR(e.loca, o.loca, 1e-6) << i;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      EXPECT_NEAR(e.per_alpha[a].assa(), o.assa_per_alpha[a], 1e-6) << i << " alpha " << alphas[a];
    }
    EXPECT_EQ(e.idsw, oracle::brute_idsw(gt, pred)) << i;
  }
}

TEST(Metrics, IdentitySwap) {
  const auto gt = two_lanes(100);
  const auto pred = swapped_at(gt, 50);
  const auto e = evaluate(gt, pred);
  const auto o = oracle::brute_hota(gt, pred, default_alphas());
  EXPECT_NEAR(e.assa, o.assa, 1e-9);
  EXPECT_NEAR(e.assa, 1.0 / 3.0, 1e-9);
  EXPECT_EQ(e.idsw, 2);
  EXPECT_EQ(e.idsw, oracle::brute_idsw(gt, pred));
  EXPECT_EQ(e.deta, 1.0);
  EXPECT_NEAR(e.idf1, 0.5, 1e-12);
}

TEST(Metrics, HotaIsGeometricMeanPerAlpha) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto [gt, pred] = fixtures::random_mini(rng);
    const auto e = evaluate(gt, pred);
    ASSERT_EQ(e.per_alpha.size(), 19u);
    for (const auto& a : e.per_alpha) {
      EXPECT_NEAR(a.hota(), std::sqrt(a.deta() * a.assa()), 1e-9);
    }
    EXPECT_GE(e.per_alpha.front().deta(), e.per_alpha.back().deta());
  }
}

TEST(Metrics, Bounds) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 40; ++i) {
    const auto [gt, pred] = fixtures::random_mini(rng);
    const auto e = evaluate(gt, pred);
    for (double v : {e.hota, e.deta, e.assa, e.detre, e.detpr, e.loca, e.idf1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(e.mota, 1.0);
    EXPECT_GE(e.idsw, 0);
  }
}

TEST(Metrics, RemovingFalsePositiveTrackKeepsDetA) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto [gt, pred] = fixtures::random_mini(rng);
    TrackTable ghost = pred;
    for (int f = 0; f < 30; ++f) ghost.push_back(TrackRow{f, 999, BBox{500, 500, 10, 10}});
    EXPECT_GE(evaluate(gt, pred).deta, evaluate(gt, ghost).deta) << i;
  }
}

TEST(Metrics, DuplicateIdsRejected) {
  TrackTable pred{TrackRow{0, 1, BBox{0, 0, 5, 5}}, TrackRow{0, 1, BBox{10, 10, 5, 5}}};
  EXPECT_THROW(evaluate(two_lanes(2), pred), ValidationError);
  EXPECT_THROW(evaluate(pred, {}), ValidationError);
  TrackTable bad{TrackRow{0, 1, BBox{0, 0, 0, 5}}};
  EXPECT_THROW(evaluate({}, bad), ValidationError);
}

TEST(Aggregate, SingleIsIdentity) {
  const auto gt = two_lanes(40);
  const auto e = evaluate(gt, swapped_at(gt, 13));
  const std::vector<SequenceEval> one{e};
  const auto a = aggregate(one);
  EXPECT_NEAR(a.hota, e.hota, 1e-12);
  EXPECT_NEAR(a.assa, e.assa, 1e-12);
  EXPECT_NEAR(a.mota, e.mota, 1e-12);
  EXPECT_NEAR(a.idf1, e.idf1, 1e-12);
  EXPECT_EQ(a.idsw, e.idsw);
}

TEST(Aggregate, EqualCountsGiveMean) {
  const auto gt = two_lanes(40);
  TrackTable half;
  for (const auto& r : gt) {
    if (r.id == 1) half.push_back(r);
  }
  const std::vector<SequenceEval> two{evaluate(gt, gt), evaluate(gt, half)};
  const auto a = aggregate(two);
  EXPECT_NEAR(a.detre, 0.5 * (two[0].detre + two[1].detre), 1e-12);
  EXPECT_NEAR(a.mota, 0.5 * (two[0].mota + two[1].mota), 1e-12);
}

TEST(Aggregate, LargerSequenceDominates) {
  const auto small = two_lanes(10);
  const auto large = two_lanes(100);
  TrackTable small_half;
  for (const auto& r : small) {
    if (r.id == 1) small_half.push_back(r);
  }
  const std::vector<SequenceEval> both{evaluate(small, small_half), evaluate(large, large)};
  const auto a = aggregate(both);
  EXPECT_LT(std::abs(a.deta - both[1].deta), std::abs(a.deta - both[0].deta));
  EXPECT_NEAR(a.detre, 210.0 / 220.0, 1e-12);
}
