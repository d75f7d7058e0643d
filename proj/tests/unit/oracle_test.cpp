#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "zsmat/association.hpp"
#include "zsmat/errors.hpp"
#include "zsmat/oracle.hpp"

using namespace zsmat;

namespace {

struct Rig {
  ScenarioConfig cfg;
  std::shared_ptr<const World> world;
  OracleSegmenter seg;

  explicit Rig(ScenarioConfig c) : cfg(std::move(c)), world(fixtures::world_of(cfg)), seg(world) {
    seg.open(fixtures::info_of(cfg));
  }
  const BitMask& visible(int frame, int object) const { return world->find(frame, object)->visible; }
};

ScenarioConfig single(int frames = 100) {
  auto c = fixtures::quiet_world(120, 90, frames);
  c.objects.push_back(fixtures::still_object(60, 45, 40, 30, frames));
  return c;
}

// A front rectangle sweeps across a static back one, fully covering it for a
// few frames, and leaves it again.
ScenarioConfig sweep() {
  auto c = fixtures::quiet_world(240, 100, 50);
  auto front = fixtures::still_object(20, 50, 30, 30, 50, 0);
  front.trajectory.vx = 4.0;
  c.objects = {front, fixtures::still_object(100, 50, 20, 20, 50, 1)};
  return c;
}

const MaskEntry& entry_of(const std::vector<MaskEntry>& entries, int id) {
  for (const auto& e : entries) {
    if (e.track_id == id) return e;
  }
  throw std::runtime_error("missing entry");
}

}  // namespace

TEST(Oracle, PromptCoveringObjectReturnsGroundTruth) {
  Rig r(single());
  r.seg.propagate(0);
  const auto e = r.seg.prompt(0, 1, BBox{40, 30, 40, 30});
  EXPECT_EQ(e.mask, r.visible(0, 0));
  EXPECT_EQ(e.occ.value, r.cfg.oracle.occ_max());
}

TEST(Oracle, PromptOverNothingIsEmpty) {
  Rig r(single());
  r.seg.propagate(0);
  const auto e = r.seg.prompt(0, 1, BBox{0, 0, 10, 10});
  EXPECT_TRUE(e.mask.empty());
  EXPECT_EQ(e.occ.value, r.cfg.oracle.occ_min());
  EXPECT_EQ(r.seg.track_info(1)->bound_object, -1);
}

TEST(Oracle, HalfVisibleObjectGetsMidrangeScore) {
  auto c = fixtures::quiet_world(120, 90, 10);
  c.objects = {fixtures::still_object(45, 50, 10, 20, 10, 0), fixtures::still_object(50, 50, 20, 20, 10, 1)};
  Rig r(c);
  r.seg.propagate(0);
  ASSERT_DOUBLE_EQ(r.world->find(0, 1)->visibility, 0.5);
  const auto e = r.seg.prompt(0, 1, BBox{48, 40, 14, 20});
  EXPECT_EQ(e.mask, r.visible(0, 1));
  EXPECT_DOUBLE_EQ(e.occ.value, 4.0);
  EXPECT_DOUBLE_EQ(e.occ.value, r.cfg.oracle.occ_of_visibility(0.5));
}

TEST(Oracle, PromptTiesPreferNearerObject) {
  auto c = fixtures::quiet_world(120, 90, 10);
  c.objects = {fixtures::still_object(55, 50, 10, 20, 10, 1), fixtures::still_object(45, 50, 10, 20, 10, 0)};
  Rig r(c);
  r.seg.propagate(0);
  r.seg.prompt(0, 1, BBox{40, 40, 20, 20});
  EXPECT_EQ(r.seg.track_info(1)->bound_object, 1);
}

TEST(Oracle, OneFrameAfterPrompt) {
  Rig r(single());
  r.seg.propagate(0);
  r.seg.prompt(0, 1, BBox{40, 30, 40, 30});
  const auto e = entry_of(r.seg.propagate(1), 1);
  EXPECT_GE(mask_iou(e.mask, r.visible(1, 0)), 0.99);
  EXPECT_GT(e.occ.value, 8.0);
}

TEST(Oracle, DecayIsStrictlyMonotone) {
  Rig r(single());
  r.seg.propagate(0);
  r.seg.prompt(0, 1, BBox{40, 30, 40, 30});
  double prev = 1.0;
  double prev_occ = r.cfg.oracle.occ_max();
  for (int f = 1; f < 100; ++f) {
    const auto e = entry_of(r.seg.propagate(f), 1);
    const double v = mask_iou(e.mask, r.visible(f, 0));
    EXPECT_LT(v, prev) << "frame " << f;
    EXPECT_LT(e.occ.value, prev_occ);
    EXPECT_EQ(mask_intersection(e.mask, r.visible(f, 0)), mask_area(e.mask));
    prev = v;
    prev_occ = e.occ.value;
  }
}

TEST(Oracle, RepromptRestoresMask) {
  Rig r(single());
  r.seg.propagate(0);
  r.seg.prompt(0, 1, BBox{40, 30, 40, 30});
  for (int f = 1; f <= 30; ++f) r.seg.propagate(f);
  const auto e = r.seg.prompt(30, 1, BBox{40, 30, 40, 30});
  EXPECT_EQ(e.mask, r.visible(30, 0));
  EXPECT_EQ(r.seg.track_info(1)->last_prompt_frame, 30);
}

TEST(Oracle, ObjectLeavingGivesEmptyLowScore) {
  auto c = fixtures::quiet_world(120, 90, 20);
  c.objects.push_back(fixtures::still_object(60, 45, 40, 30, 10));
  Rig r(c);
  r.seg.propagate(0);
  r.seg.prompt(0, 1, BBox{40, 30, 40, 30});
  for (int f = 1; f < 20; ++f) {
    const auto e = entry_of(r.seg.propagate(f), 1);
    if (f >= 10) {
      EXPECT_TRUE(e.mask.empty());
      EXPECT_LE(e.occ.value, 2.0);
    }
  }
}

TEST(Oracle, DropMemoryHaltsContamination) {
  for (bool drop : {true, false}) {
    Rig r(sweep());
    r.seg.propagate(0);
    r.seg.prompt(0, 1, BBox{90, 40, 20, 20});
    MaskEntry last;
    for (int f = 1; f < 50; ++f) {
      last = entry_of(r.seg.propagate(f), 1);
      const auto info = *r.seg.track_info(1);
      if (drop && !info.contaminating_frames.empty() && info.contaminating_frames.back() == f) {
        EXPECT_TRUE(r.seg.drop_memory(1, f).changed);
      }
    }
    const auto info = *r.seg.track_info(1);
    ASSERT_GE(info.contaminating_frames.size(), 4u);
    const double to_back = mask_iou(last.mask, r.visible(49, 1));
    const double to_front = mask_iou(last.mask, r.visible(49, 0));
    if (drop) {
      EXPECT_EQ(info.bound_object, 1);
      EXPECT_GT(to_back, 0.85);
      EXPECT_EQ(to_front, 0.0);
    } else {
      EXPECT_EQ(info.bound_object, 0);
      EXPECT_GT(to_front, to_back);
    }
  }
}

TEST(Oracle, PartialContaminationDrifts) {
  Rig r(sweep());
  r.seg.propagate(0);
  r.seg.prompt(0, 1, BBox{90, 40, 20, 20});
  int f = 1;
  while (r.seg.track_info(1)->contaminating_frames.empty()) r.seg.propagate(f++);
  EXPECT_DOUBLE_EQ(r.seg.track_info(1)->contamination, r.cfg.oracle.contamination_rate);
  EXPECT_EQ(r.seg.track_info(1)->contaminant, 0);
}

TEST(Oracle, TracksAreIndependent) {
  const auto outputs = [](bool extra) {
    Rig r(sweep());
    std::vector<MaskEntry> mine;
    r.seg.propagate(0);
    mine.push_back(r.seg.prompt(0, 1, BBox{90, 40, 20, 20}));
    if (extra) r.seg.prompt(0, 7, BBox{5, 35, 30, 30});
    for (int f = 1; f < 50; ++f) {
      mine.push_back(entry_of(r.seg.propagate(f), 1));
      if (extra && f == 20) r.seg.drop_memory(7, f);
      if (extra && f == 30) r.seg.prompt(f, 9, BBox{90, 40, 20, 20});
    }
    return mine;
  };
  EXPECT_EQ(outputs(false), outputs(true));
}

TEST(Oracle, DropIsIdempotentAndKeyedByTrack) {
  Rig r(sweep());
  r.seg.propagate(0);
  r.seg.prompt(0, 1, BBox{90, 40, 20, 20});
  for (int f = 1; f <= 3; ++f) r.seg.propagate(f);
  const auto first = r.seg.drop_memory(1, 2);
  EXPECT_TRUE(first.known_track);
  EXPECT_FALSE(first.changed);
  EXPECT_FALSE(r.seg.drop_memory(1, 2).changed);
  const auto unknown = r.seg.drop_memory(42, 3);
  EXPECT_FALSE(unknown.known_track);
  EXPECT_FALSE(unknown.changed);
}

TEST(Oracle, DroppingTheOnlyPromptForgetsTheTrack) {
  Rig r(single());
  r.seg.propagate(0);
  r.seg.propagate(1);
  r.seg.prompt(1, 5, BBox{40, 30, 40, 30});
  EXPECT_EQ(r.seg.track_ids(), std::vector<int>{5});
  EXPECT_TRUE(r.seg.drop_memory(5, 1).changed);
  EXPECT_TRUE(r.seg.track_ids().empty());
  EXPECT_TRUE(r.seg.propagate(2).empty());
}

TEST(Oracle, DroppingARepromptRestoresPriorMemory) {
  Rig r(single());
  r.seg.propagate(0);
  r.seg.prompt(0, 1, BBox{40, 30, 40, 30});
  for (int f = 1; f <= 5; ++f) r.seg.propagate(f);
  r.seg.prompt(5, 1, BBox{0, 0, 10, 10});
  EXPECT_EQ(r.seg.track_info(1)->bound_object, -1);
  r.seg.drop_memory(1, 5);
  EXPECT_EQ(r.seg.track_info(1)->bound_object, 0);
  EXPECT_EQ(r.seg.track_info(1)->last_prompt_frame, 0);
}

TEST(Oracle, FrameOrderEnforced) {
  Rig r(single(10));
  EXPECT_THROW(r.seg.propagate(1), ProtocolError);
  r.seg.propagate(0);
  EXPECT_THROW(r.seg.propagate(0), ProtocolError);
  EXPECT_THROW(r.seg.prompt(1, 1, BBox{40, 30, 40, 30}), ProtocolError);
  EXPECT_THROW(r.seg.prompt(0, 1, BBox{40, 30, 0, 30}), ProtocolError);
  EXPECT_THROW(r.seg.drop_memory(1, 1), ProtocolError);
  for (int f = 1; f < 10; ++f) r.seg.propagate(f);
  EXPECT_THROW(r.seg.propagate(10), ProtocolError);
}

TEST(Oracle, OpenChecksDimensions) {
  const auto c = single(10);
  OracleSegmenter seg(fixtures::world_of(c));
  EXPECT_THROW(seg.open(SequenceInfo{"x", 64, 48, 10}), ProtocolError);
  EXPECT_THROW(seg.open(SequenceInfo{"x", 120, 90, 11}), ProtocolError);
  EXPECT_THROW(seg.propagate(0), ProtocolError);
}
