#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "zsmat/association.hpp"
#include "zsmat/errors.hpp"
#include "zsmat/synth.hpp"

using namespace zsmat;

namespace {

BBox footprint(const ObjectSpec& o, int frame) {
  const auto [cx, cy] = o.trajectory.centre_at(frame);
  return BBox{cx - 0.5 * o.width, cy - 0.5 * o.height, o.width, o.height};
}

ScenarioConfig rect_crossing() {
  auto c = fixtures::quiet_world(200, 80, 60);
  auto front = fixtures::still_object(20, 40, 24, 20, 60, 0);
  front.trajectory.vx = 3.0;
  auto back = fixtures::still_object(180, 42, 20, 16, 60, 1);
  back.trajectory.vx = -3.0;
  c.objects = {front, back};
  return c;
}

}  // namespace

TEST(Generate, NoiseFreeLimit) {
  auto c = fixtures::quiet_world(120, 90, 30);
  c.objects.push_back(fixtures::still_object(60, 45, 30, 20, 30));
  const auto s = generate(c);
  ASSERT_EQ(s.ground_truth.size(), 30u);
  for (int f = 0; f < 30; ++f) {
    const auto& dets = s.detections[static_cast<std::size_t>(f)];
    ASSERT_EQ(dets.size(), 1u);
    EXPECT_EQ(dets[0].bbox, s.ground_truth[static_cast<std::size_t>(f)].box);
    EXPECT_EQ(dets[0].bbox, (BBox{45, 35, 30, 20}));
    EXPECT_EQ(dets[0].score, 0.9);
  }
}

TEST(Generate, AllMissedLeavesOnlyFalsePositives) {
  auto c = easy_scenario(3);
  c.detector_noise.fn_rate = 1.0;
  const auto s = generate(c);
  std::size_t n = 0;
  for (std::size_t f = 0; f < s.detections.size(); ++f) {
    for (const auto& d : s.detections[f]) {
      ++n;
      for (const auto& g : s.ground_truth) {
        if (g.frame == static_cast<int>(f)) {
          EXPECT_LT(iou(d.bbox, g.box), 0.9);
        }
      }
      EXPECT_LT(d.score, 0.6);
    }
  }
  EXPECT_GT(n, 0u);
}

TEST(Generate, CrossingVisibilityMatchesRasterOverlap) {
  const auto c = rect_crossing();
  const auto world = build_world(c);
  int dipped = 0;
  for (int f = 0; f < c.frames; ++f) {
    const auto fb = oracle::box_raster(footprint(c.objects[0], f), c.width, c.height);
    const auto bb = oracle::box_raster(footprint(c.objects[1], f), c.width, c.height);
    std::int64_t overlap = 0;
    for (std::size_t i = 0; i < fb.size(); ++i) overlap += fb[i] && bb[i];
    const double expected = 1.0 - static_cast<double>(overlap) / static_cast<double>(oracle::count(bb));
    const auto* back = world.find(f, 1);
    ASSERT_NE(back, nullptr);
    EXPECT_NEAR(back->visibility, expected, 1e-12) << "frame " << f;
    EXPECT_DOUBLE_EQ(world.find(f, 0)->visibility, 1.0);
    if (back->visibility < 1.0) ++dipped;
  }
  EXPECT_GT(dipped, 5);
}

TEST(Generate, CrossingPresetDipsBelowSnapVisibility) {
  const auto c = crossing_scenario(1);
  const auto world = build_world(c);
  double lowest = 1.0;
  for (int f = 0; f < c.frames; ++f) {
    if (const auto* o = world.find(f, 1)) lowest = std::min(lowest, o->visibility);
  }
  EXPECT_LT(lowest, c.oracle.snap_visibility);
}

TEST(Generate, VisibilityConsistency) {
  for (const auto& c : {easy_scenario(2), crossing_scenario(2), crowded_scenario(2)}) {
    const auto world = build_world(c);
    for (const auto& frame : world.frames) {
      for (const auto& o : frame) {
        const double expected = static_cast<double>(mask_area(o.visible)) / static_cast<double>(mask_area(o.full));
        EXPECT_DOUBLE_EQ(o.visibility, expected);
        EXPECT_EQ(mask_intersection(o.visible, o.full), mask_area(o.visible));
      }
    }
  }
}

TEST(Generate, VisibleMasksAreDisjoint) {
  const auto world = build_world(crowded_scenario(4));
  for (const auto& frame : world.frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      for (std::size_t j = i + 1; j < frame.size(); ++j) {
        EXPECT_EQ(mask_intersection(frame[i].visible, frame[j].visible), 0);
      }
    }
  }
}

TEST(Generate, Deterministic) {
  const auto a = generate(crowded_scenario(9));
  const auto b = generate(crowded_scenario(9));
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  EXPECT_EQ(a.detections, b.detections);
  const auto c = generate(crowded_scenario(10));
  EXPECT_NE(a.detections, c.detections);
}

TEST(Generate, DetectionsSortedByScore) {
  const auto s = generate(crowded_scenario(1));
  for (const auto& dets : s.detections) {
    for (std::size_t i = 1; i < dets.size(); ++i) EXPECT_GE(dets[i - 1].score, dets[i].score);
  }
}

TEST(Generate, DegenerateConfigRejected) {
  auto c = fixtures::quiet_world(50, 50, 10);
  EXPECT_THROW(generate(c), ValidationError);
  c.detector_noise.fp_rate = 0.5;
  EXPECT_NO_THROW(generate(c));
}

TEST(Generate, InvalidObjectsRejected) {
  auto c = fixtures::quiet_world(50, 50, 10);
  c.objects.push_back(fixtures::still_object(10, 10, 5, 5, 11));
  EXPECT_THROW(c.validate(), ValidationError);
  c.objects.back().exit_frame = 10;
  c.objects.back().enter_frame = 10;
  EXPECT_THROW(c.validate(), ValidationError);
  c.objects.back().enter_frame = 0;
  c.detector_noise.tp_score_mode.mean = 0.1;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Scenario, JsonRoundTrip) {
  for (const auto& c : {easy_scenario(5), crossing_scenario(5), crowded_scenario(5), ablation_suite(5)[3]}) {
    const auto text = scenario_to_json(c);
    const auto back = scenario_from_json(text);
    EXPECT_EQ(scenario_to_json(back), text);
    EXPECT_EQ(generate(back).detections, generate(c).detections);
  }
}

TEST(Scenario, PresetLookup) {
  EXPECT_EQ(preset_scenario("easy", 4).objects.size(), 3u);
  EXPECT_EQ(preset_scenario("crowded", 4).objects.size(), 8u);
  EXPECT_EQ(scenario_to_json(preset_scenario("ablation-2", 4)), scenario_to_json(ablation_suite(4)[2]));
  EXPECT_THROW(preset_scenario("ablation-10", 4), ValidationError);
  EXPECT_THROW(preset_scenario("nope", 4), ValidationError);
}

TEST(Scenario, OccMapCalibration) {
  const OracleConfig o;
  EXPECT_GT(o.occ_of_visibility(1.0), 8.0);
  EXPECT_LT(o.occ_of_visibility(0.0), 2.0);
  double prev = o.occ_of_visibility(0.0);
  for (int i = 1; i <= 100; ++i) {
    const double v = o.occ_of_visibility(i / 100.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

// Detections overlapping a visible target are true positives; the exhaustive
// split must put at least 95% of all samples on the right side.
TEST(Generate, ScoresAreBimodal) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto c = fixtures::quiet_world(320, 240, 100);
    c.seed = seed;
    c.detector_noise = DetectorNoise{};
    for (int i = 0; i < 4; ++i) {
      c.objects.push_back(fixtures::still_object(50 + 70 * i, 60 + 35 * i, 30, 24, 100));
    }
    const auto s = generate(c);
    std::vector<double> scores;
    std::vector<bool> positive;
    for (const auto& dets : s.detections) {
      for (const auto& d : dets) {
        bool tp = false;
        for (const auto& g : s.ground_truth) {
          tp = tp || (g.frame == d.frame && iou(d.bbox, g.box) >= 0.5);
        }
        scores.push_back(d.score);
        positive.push_back(tp);
      }
    }
    const auto split = oracle::best_split(scores);
    const double cut = 0.5 * (split.low_max + split.high_min);
    std::size_t right = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) right += (scores[i] > cut) == positive[i];
    EXPECT_GE(static_cast<double>(right) / static_cast<double>(scores.size()), 0.95) << "seed " << seed;
  }
}
