#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zsmat/geometry.hpp"
#include "zsmat/mask.hpp"
#include "zsmat/track_table.hpp"

namespace zsmat {

enum class Shape { Ellipse, Rectangle };

/// Linear drift plus a sinusoidal wobble, evaluated at integer frames.
struct Trajectory {
  double x0 = 0.0;  // centre at frame 0
  double y0 = 0.0;
  double vx = 0.0;  // pixels per frame
  double vy = 0.0;
  double amp_x = 0.0;
  double amp_y = 0.0;
  double period = 50.0;  // frames
  double phase = 0.0;    // radians

  std::pair<double, double> centre_at(int frame) const;
};

struct ObjectSpec {
  Shape shape = Shape::Ellipse;
  double width = 20.0;
  double height = 20.0;
  Trajectory trajectory;
  int enter_frame = 0;
  int exit_frame = 0;  // exclusive
  int depth = 0;       // smaller is nearer the camera
  /// Segmentable clutter outside the target class: never in ground truth,
  /// detected with false-positive-mode scores.
  bool distractor = false;
};

struct ScoreMode {
  double mean = 0.5;
  double spread = 0.05;
};

struct DetectorNoise {
  ScoreMode tp_score_mode{0.75, 0.06};
  ScoreMode fp_score_mode{0.25, 0.06};
  double fp_rate = 0.5;          // background false positives per frame (Poisson mean)
  double fn_rate = 0.05;         // miss probability for visible targets
  double box_jitter = 0.03;      // relative std of box perturbation
  double min_visibility = 0.25;  // objects less visible than this are never detected
  double distractor_rate = 0.9;  // detection probability of a visible distractor
  double fp_min_size = 8.0;
  double fp_max_size = 40.0;
  std::string label = "animal";
};

/// Behaviour of the simulated segmenter.
struct OracleConfig {
  /// Piecewise-linear visibility -> occlusion score map, knots sorted by visibility.
  std::vector<std::pair<double, double>> occ_knots{{0.0, -2.0}, {1.0, 10.0}};
  double decay_per_frame = 0.002;     // fraction of mask pixels lost per frame since the last prompt
  double max_decay = 0.5;
  double occ_decay_per_frame = 0.05;  // occlusion-score penalty per frame since the last prompt
  double contamination_rate = 0.25;   // memory drift per undropped contaminating frame
  double snap_visibility = 0.35;      // below this an occluded track latches onto its occluder

  double occ_of_visibility(double visibility) const;
  double occ_min() const;
  double occ_max() const;
};

struct ScenarioConfig {
  std::string name = "synthetic";
  std::uint64_t seed = 0;
  int width = 320;
  int height = 240;
  int frames = 100;
  std::vector<ObjectSpec> objects;
  DetectorNoise detector_noise;
  OracleConfig oracle;

  /// Throws ValidationError.
  void validate() const;
};

/// One object's appearance in one frame. Only objects with a non-empty
/// in-image footprint are listed.
struct ObjectFrame {
  int object = 0;  // index into ScenarioConfig::objects
  int id = 0;      // object + 1
  bool distractor = false;
  int depth = 0;
  BitMask full;     // clipped to the image, ignoring occlusion
  BitMask visible;  // full minus nearer objects
  double visibility = 0.0;
};

struct World {
  ScenarioConfig config;
  std::vector<std::vector<ObjectFrame>> frames;

  const ObjectFrame* find(int frame, int object) const;
};

struct Scenario {
  World world;
  TrackTable ground_truth;                         // visible-mask boxes of targets
  std::vector<std::vector<Detection>> detections;  // per frame, sorted by descending score
};

World build_world(const ScenarioConfig& cfg);
/// Throws ValidationError for invalid or degenerate configs (no objects and no false positives).
Scenario generate(const ScenarioConfig& cfg);

/// Ground-truth rows (targets with a visible footprint) of a whole world.
TrackTable ground_truth_of(const World& world);

std::string scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(std::string_view text);

// Seeded presets.
ScenarioConfig easy_scenario(std::uint64_t seed);
ScenarioConfig crossing_scenario(std::uint64_t seed);
ScenarioConfig crowded_scenario(std::uint64_t seed);
/// `count` sequences whose score modes shift from sequence to sequence.
std::vector<ScenarioConfig> ablation_suite(std::uint64_t seed, int count = 10);
/// Looks up a preset by name (easy, crossing, crowded, ablation-N). Throws ValidationError.
ScenarioConfig preset_scenario(const std::string& name, std::uint64_t seed);

}  // namespace zsmat
