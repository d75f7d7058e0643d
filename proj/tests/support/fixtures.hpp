#pragma once

#include <memory>

#include "zsmat/oracle.hpp"
#include "zsmat/synth.hpp"

namespace fixtures {

inline zsmat::ObjectSpec still_object(double cx, double cy, double w, double h, int frames, int depth = 0) {
  zsmat::ObjectSpec o;
  o.shape = zsmat::Shape::Rectangle;
  o.width = w;
  o.height = h;
  o.trajectory.x0 = cx;
  o.trajectory.y0 = cy;
  o.exit_frame = frames;
  o.depth = depth;
  return o;
}

inline zsmat::ScenarioConfig quiet_world(int width, int height, int frames) {
  zsmat::ScenarioConfig c;
  c.name = "fixture";
  c.seed = 5;
  c.width = width;
  c.height = height;
  c.frames = frames;
  c.detector_noise.fp_rate = 0.0;
  c.detector_noise.fn_rate = 0.0;
  c.detector_noise.box_jitter = 0.0;
  c.detector_noise.tp_score_mode = {0.9, 0.0};
  return c;
}

inline std::shared_ptr<const zsmat::World> world_of(const zsmat::ScenarioConfig& c) {
  return std::make_shared<const zsmat::World>(zsmat::build_world(c));
}

inline zsmat::SequenceInfo info_of(const zsmat::ScenarioConfig& c) {
  return zsmat::SequenceInfo{c.name, c.width, c.height, c.frames};
}

}  // namespace fixtures
