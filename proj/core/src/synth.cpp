#include "zsmat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "json.hpp"
#include "zsmat/errors.hpp"

namespace zsmat {

using json = nlohmann::json;

std::pair<double, double> Trajectory::centre_at(int frame) const {
  const double t = static_cast<double>(frame);
  const double angle = 2.0 * std::numbers::pi * t / period + phase;
  return {x0 + vx * t + amp_x * std::sin(angle), y0 + vy * t + amp_y * std::sin(angle)};
}

double OracleConfig::occ_of_visibility(double visibility) const {
  const double v = std::clamp(visibility, 0.0, 1.0);
  if (occ_knots.empty()) {
    return 0.0;
  }
  if (v <= occ_knots.front().first) {
    return occ_knots.front().second;
  }
  for (std::size_t i = 1; i < occ_knots.size(); ++i) {
    const auto [v0, s0] = occ_knots[i - 1];
    const auto [v1, s1] = occ_knots[i];
    if (v <= v1) {
      return v1 > v0 ? s0 + (s1 - s0) * (v - v0) / (v1 - v0) : s1;
    }
  }
  return occ_knots.back().second;
}

double OracleConfig::occ_min() const { return occ_of_visibility(0.0); }
double OracleConfig::occ_max() const { return occ_of_visibility(1.0); }

void ScenarioConfig::validate() const {
  if (width <= 0 || height <= 0) {
    throw ValidationError(fmt::format("scenario '{}': frame size must be positive", name));
  }
  if (frames <= 0) {
    throw ValidationError(fmt::format("scenario '{}': frames must be positive", name));
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (!(o.enter_frame >= 0 && o.enter_frame < o.exit_frame && o.exit_frame <= frames)) {
      throw ValidationError(fmt::format("scenario '{}': object {} needs 0 <= enter_frame < exit_frame <= frames", name, i));
    }
    if (!(o.width > 0.0 && o.height > 0.0)) {
      throw ValidationError(fmt::format("scenario '{}': object {} needs a positive size", name, i));
    }
    if (!(o.trajectory.period > 0.0)) {
      throw ValidationError(fmt::format("scenario '{}': object {} needs a positive wobble period", name, i));
    }
  }
  const auto& n = detector_noise;
  if (!(n.tp_score_mode.mean > n.fp_score_mode.mean)) {
    throw ValidationError(fmt::format("scenario '{}': tp score mode must lie above the fp mode", name));
  }
  if (n.tp_score_mode.spread < 0.0 || n.fp_score_mode.spread < 0.0 || n.fp_rate < 0.0 || n.box_jitter < 0.0) {
    throw ValidationError(fmt::format("scenario '{}': noise parameters must be non-negative", name));
  }
  for (double p : {n.fn_rate, n.min_visibility, n.distractor_rate}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError(fmt::format("scenario '{}': probabilities must lie in [0, 1]", name));
    }
  }
  if (!(n.fp_min_size > 0.0 && n.fp_max_size >= n.fp_min_size)) {
    throw ValidationError(fmt::format("scenario '{}': need 0 < fp_min_size <= fp_max_size", name));
  }
  if (objects.empty() && n.fp_rate == 0.0) {
    throw ValidationError(fmt::format("scenario '{}' is degenerate: no objects and no false positives", name));
  }
  const auto& knots = oracle.occ_knots;
  if (knots.empty()) {
    throw ValidationError(fmt::format("scenario '{}': oracle occ map needs at least one knot", name));
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].first < knots[i - 1].first || knots[i].second < knots[i - 1].second) {
      throw ValidationError(fmt::format("scenario '{}': oracle occ map must be monotone nondecreasing", name));
    }
  }
  if (oracle.decay_per_frame < 0.0 || oracle.max_decay < 0.0 || oracle.max_decay > 1.0 ||
      oracle.occ_decay_per_frame < 0.0 || oracle.contamination_rate < 0.0 || oracle.snap_visibility < 0.0 ||
      oracle.snap_visibility > 1.0) {
    throw ValidationError(fmt::format("scenario '{}': oracle parameters out of range", name));
  }
}

const ObjectFrame* World::find(int frame, int object) const {
  if (frame < 0 || frame >= static_cast<int>(frames.size())) {
    return nullptr;
  }
  for (const auto& o : frames[static_cast<std::size_t>(frame)]) {
    if (o.object == object) {
      return &o;
    }
  }
  return nullptr;
}

namespace {

BitMask rasterize(const ObjectSpec& spec, int frame, int width, int height) {
  const auto [cx, cy] = spec.trajectory.centre_at(frame);
  const double hw = 0.5 * spec.width;
  const double hh = 0.5 * spec.height;
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - hw)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + hw)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - hh)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + hh)));
  std::vector<std::uint32_t> indices;
  for (int x = x0; x <= x1; ++x) {
    const double px = x + 0.5;
    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      bool inside = false;
      if (spec.shape == Shape::Ellipse) {
        const double dx = (px - cx) / hw;
        const double dy = (py - cy) / hh;
        inside = dx * dx + dy * dy <= 1.0;
      } else {
        inside = px >= cx - hw && px < cx + hw && py >= cy - hh && py < cy + hh;
      }
      if (inside) {
        indices.push_back(static_cast<std::uint32_t>(x) * static_cast<std::uint32_t>(height) +
                          static_cast<std::uint32_t>(y));
      }
    }
  }
  return BitMask::from_indices(width, height, indices);
}

double sample_score(std::mt19937_64& rng, const ScoreMode& mode) {
  if (mode.spread <= 0.0) {
    return std::clamp(mode.mean, 0.0, 1.0);
  }
  std::normal_distribution<double> dist(mode.mean, mode.spread);
  return std::clamp(dist(rng), 0.0, 1.0);
}

BBox clip_box(BBox b, int width, int height) {
  const double x0 = std::clamp(b.x, 0.0, static_cast<double>(width) - 1.0);
  const double y0 = std::clamp(b.y, 0.0, static_cast<double>(height) - 1.0);
  const double x1 = std::clamp(b.right(), x0 + 1.0, static_cast<double>(width));
  const double y1 = std::clamp(b.bottom(), y0 + 1.0, static_cast<double>(height));
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

World build_world(const ScenarioConfig& cfg) {
  cfg.validate();
  World world;
  world.config = cfg;
  world.frames.resize(static_cast<std::size_t>(cfg.frames));

  // Nearest first: depth, then declaration order.
  std::vector<int> order(cfg.objects.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<int>(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return cfg.objects[static_cast<std::size_t>(a)].depth < cfg.objects[static_cast<std::size_t>(b)].depth;
  });

  for (int f = 0; f < cfg.frames; ++f) {
    auto& frame = world.frames[static_cast<std::size_t>(f)];
    BitMask nearer(cfg.width, cfg.height);
    for (int idx : order) {
      const auto& spec = cfg.objects[static_cast<std::size_t>(idx)];
      if (f < spec.enter_frame || f >= spec.exit_frame) {
        continue;
      }
      BitMask full = rasterize(spec, f, cfg.width, cfg.height);
      const auto full_area = mask_area(full);
      if (full_area == 0) {
        continue;
      }
      ObjectFrame of;
      of.object = idx;
      of.id = idx + 1;
      of.distractor = spec.distractor;
      of.depth = spec.depth;
      of.visible = mask_subtract(full, nearer);
      of.visibility = static_cast<double>(mask_area(of.visible)) / static_cast<double>(full_area);
      nearer = mask_or(nearer, full);
      of.full = std::move(full);
      frame.push_back(std::move(of));
    }
    std::sort(frame.begin(), frame.end(), [](const auto& a, const auto& b) { return a.object < b.object; });
  }
  return world;
}

TrackTable ground_truth_of(const World& world) {
  TrackTable gt;
  for (std::size_t f = 0; f < world.frames.size(); ++f) {
    for (const auto& o : world.frames[f]) {
      if (o.distractor) {
        continue;
      }
      if (auto box = mask_to_bbox(o.visible)) {
        gt.push_back(TrackRow{static_cast<int>(f), o.id, *box, 1.0, 1, o.visibility});
      }
    }
  }
  return gt;
}

Scenario generate(const ScenarioConfig& cfg) {
  Scenario s;
  s.world = build_world(cfg);
  s.ground_truth = ground_truth_of(s.world);
  const auto& noise = cfg.detector_noise;
  s.detections.resize(static_cast<std::size_t>(cfg.frames));

  for (int f = 0; f < cfg.frames; ++f) {
    // Independent stream per frame keeps frames reproducible in isolation.
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(f), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto& dets = s.detections[static_cast<std::size_t>(f)];

    for (const auto& o : s.world.frames[static_cast<std::size_t>(f)]) {
      const double u = unit(rng);
      const double jx = gauss(rng);
      const double jy = gauss(rng);
      const double jw = gauss(rng);
      const double jh = gauss(rng);
      const auto box = mask_to_bbox(o.visible);
      if (!box || o.visibility < noise.min_visibility) {
        continue;
      }
      const bool detected = o.distractor ? u < noise.distractor_rate : u >= noise.fn_rate;
      if (!detected) {
        continue;
      }
      const double j = noise.box_jitter;
      BBox b{box->x + jx * j * box->w, box->y + jy * j * box->h, box->w * std::exp(jw * j),
             box->h * std::exp(jh * j)};
      const double score = sample_score(rng, o.distractor ? noise.fp_score_mode : noise.tp_score_mode);
      dets.push_back(Detection{f, clip_box(b, cfg.width, cfg.height), score, noise.label});
    }

    std::poisson_distribution<int> fp_count(noise.fp_rate > 0.0 ? noise.fp_rate : 1e-12);
    const int n_fp = noise.fp_rate > 0.0 ? fp_count(rng) : 0;
    std::uniform_real_distribution<double> size(noise.fp_min_size, noise.fp_max_size);
    for (int k = 0; k < n_fp; ++k) {
      const double w = size(rng);
      const double h = size(rng);
      std::uniform_real_distribution<double> ux(0.0, std::max(1.0, cfg.width - w));
      std::uniform_real_distribution<double> uy(0.0, std::max(1.0, cfg.height - h));
      BBox b{ux(rng), uy(rng), w, h};
      const double score = sample_score(rng, noise.fp_score_mode);
      dets.push_back(Detection{f, clip_box(b, cfg.width, cfg.height), score, noise.label});
    }
    std::stable_sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON echo of the configuration.

namespace {

json mode_json(const ScoreMode& m) { return json{{"mean", m.mean}, {"spread", m.spread}}; }

ScoreMode mode_from(const json& j) { return ScoreMode{j.at("mean").get<double>(), j.at("spread").get<double>()}; }

}  // namespace

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json objects = json::array();
  for (const auto& o : cfg.objects) {
    const auto& t = o.trajectory;
    objects.push_back(json{
        {"shape", o.shape == Shape::Ellipse ? "ellipse" : "rectangle"},
        {"size", {o.width, o.height}},
        {"trajectory",
         {{"x0", t.x0}, {"y0", t.y0}, {"vx", t.vx}, {"vy", t.vy}, {"amp_x", t.amp_x}, {"amp_y", t.amp_y},
          {"period", t.period}, {"phase", t.phase}}},
        {"enter_frame", o.enter_frame},
        {"exit_frame", o.exit_frame},
        {"depth", o.depth},
        {"distractor", o.distractor},
    });
  }
  const auto& n = cfg.detector_noise;
  json knots = json::array();
  for (const auto& [v, s] : cfg.oracle.occ_knots) {
    knots.push_back({v, s});
  }
  json j{
      {"name", cfg.name},
      {"seed", cfg.seed},
      {"width", cfg.width},
      {"height", cfg.height},
      {"frames", cfg.frames},
      {"objects", objects},
      {"detector_noise",
       {{"tp_score_mode", mode_json(n.tp_score_mode)},
        {"fp_score_mode", mode_json(n.fp_score_mode)},
        {"fp_rate", n.fp_rate},
        {"fn_rate", n.fn_rate},
        {"box_jitter", n.box_jitter},
        {"min_visibility", n.min_visibility},
        {"distractor_rate", n.distractor_rate},
        {"fp_min_size", n.fp_min_size},
        {"fp_max_size", n.fp_max_size},
        {"label", n.label}}},
      {"oracle",
       {{"occ_knots", knots},
        {"decay_per_frame", cfg.oracle.decay_per_frame},
        {"max_decay", cfg.oracle.max_decay},
        {"occ_decay_per_frame", cfg.oracle.occ_decay_per_frame},
        {"contamination_rate", cfg.oracle.contamination_rate},
        {"snap_visibility", cfg.oracle.snap_visibility}}},
  };
  return j.dump(2);
}

ScenarioConfig scenario_from_json(std::string_view text) {
  const json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("scenario file is not a JSON object");
  }
  ScenarioConfig cfg;
  try {
    cfg.name = j.value("name", cfg.name);
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.width = j.at("width").get<int>();
    cfg.height = j.at("height").get<int>();
    cfg.frames = j.at("frames").get<int>();
    for (const auto& o : j.at("objects")) {
      ObjectSpec spec;
      const auto shape = o.at("shape").get<std::string>();
      if (shape == "ellipse") {
        spec.shape = Shape::Ellipse;
      } else if (shape == "rectangle") {
        spec.shape = Shape::Rectangle;
      } else {
        throw ValidationError(fmt::format("unknown shape '{}'", shape));
      }
      spec.width = o.at("size").at(0).get<double>();
      spec.height = o.at("size").at(1).get<double>();
      const auto& t = o.at("trajectory");
      spec.trajectory = Trajectory{t.at("x0").get<double>(),    t.at("y0").get<double>(),    t.at("vx").get<double>(),
                                   t.at("vy").get<double>(),    t.at("amp_x").get<double>(), t.at("amp_y").get<double>(),
                                   t.at("period").get<double>(), t.at("phase").get<double>()};
      spec.enter_frame = o.at("enter_frame").get<int>();
      spec.exit_frame = o.at("exit_frame").get<int>();
      spec.depth = o.at("depth").get<int>();
      spec.distractor = o.value("distractor", false);
      cfg.objects.push_back(spec);
    }
    if (j.contains("detector_noise")) {
      const auto& n = j.at("detector_noise");
      auto& d = cfg.detector_noise;
      d.tp_score_mode = mode_from(n.at("tp_score_mode"));
      d.fp_score_mode = mode_from(n.at("fp_score_mode"));
      d.fp_rate = n.at("fp_rate").get<double>();
      d.fn_rate = n.at("fn_rate").get<double>();
      d.box_jitter = n.at("box_jitter").get<double>();
      d.min_visibility = n.value("min_visibility", d.min_visibility);
      d.distractor_rate = n.value("distractor_rate", d.distractor_rate);
      d.fp_min_size = n.value("fp_min_size", d.fp_min_size);
      d.fp_max_size = n.value("fp_max_size", d.fp_max_size);
      d.label = n.value("label", d.label);
    }
    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      auto& c = cfg.oracle;
      if (o.contains("occ_knots")) {
        c.occ_knots.clear();
        for (const auto& k : o.at("occ_knots")) {
          c.occ_knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
        }
      }
      c.decay_per_frame = o.value("decay_per_frame", c.decay_per_frame);
      c.max_decay = o.value("max_decay", c.max_decay);
      c.occ_decay_per_frame = o.value("occ_decay_per_frame", c.occ_decay_per_frame);
      c.contamination_rate = o.value("contamination_rate", c.contamination_rate);
      c.snap_visibility = o.value("snap_visibility", c.snap_visibility);
    }
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("invalid scenario file: {}", e.what()));
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Presets.

ScenarioConfig easy_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  ScenarioConfig cfg;
  cfg.name = "easy";
  cfg.seed = seed;
  cfg.frames = 100;
  const double lanes[3] = {50.0, 120.0, 190.0};
  for (int i = 0; i < 3; ++i) {
    ObjectSpec o;
    o.shape = i == 1 ? Shape::Rectangle : Shape::Ellipse;
    o.width = 36.0 + 4.0 * jitter(rng);
    o.height = 28.0 + 3.0 * jitter(rng);
    const double dir = i % 2 == 0 ? 1.0 : -1.0;
    o.trajectory = Trajectory{160.0 - dir * 60.0 + 10.0 * jitter(rng), lanes[i], dir * (1.0 + 0.2 * jitter(rng)), 0.0,
                              0.0, 6.0, 60.0 + 10.0 * jitter(rng), 3.0 * jitter(rng)};
    o.enter_frame = 0;
    o.exit_frame = cfg.frames;
    o.depth = i;
    cfg.objects.push_back(o);
  }
  cfg.detector_noise.tp_score_mode = {0.8, 0.05};
  cfg.detector_noise.fp_score_mode = {0.3, 0.06};
  cfg.detector_noise.fp_rate = 0.3;
  cfg.detector_noise.fn_rate = 0.05;
  cfg.detector_noise.box_jitter = 0.03;
  return cfg;
}

ScenarioConfig crossing_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  ScenarioConfig cfg;
  cfg.name = "crossing";
  cfg.seed = seed;
  cfg.frames = 80;
  ObjectSpec front;
  front.shape = Shape::Ellipse;
  front.width = 44.0;
  front.height = 34.0;
  front.trajectory = Trajectory{60.0, 120.0 + 2.0 * jitter(rng), 2.5, 0.0, 0.0, 0.0, 50.0, 0.0};
  front.exit_frame = cfg.frames;
  front.depth = 0;
  ObjectSpec back = front;
  back.width = 40.0;
  back.height = 30.0;
  back.trajectory = Trajectory{260.0, 120.0 + 2.0 * jitter(rng), -2.5, 0.0, 0.0, 0.0, 50.0, 0.0};
  back.depth = 1;
  cfg.objects = {front, back};
  cfg.detector_noise.tp_score_mode = {0.8, 0.05};
  cfg.detector_noise.fp_score_mode = {0.3, 0.06};
  cfg.detector_noise.fp_rate = 0.2;
  cfg.detector_noise.fn_rate = 0.0;
  cfg.detector_noise.box_jitter = 0.02;
  return cfg;
}

ScenarioConfig crowded_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ScenarioConfig cfg;
  cfg.name = "crowded";
  cfg.seed = seed;
  cfg.frames = 120;
  for (int i = 0; i < 8; ++i) {
    ObjectSpec o;
    o.shape = i % 3 == 0 ? Shape::Rectangle : Shape::Ellipse;
    o.width = 30.0 + 10.0 * unit(rng);
    o.height = 26.0 + 8.0 * unit(rng);
    const double cx = 110.0 + 100.0 * unit(rng);
    const double cy = 80.0 + 80.0 * unit(rng);
    o.trajectory = Trajectory{cx, cy, 0.0, 0.0, 25.0 + 20.0 * unit(rng), 15.0 + 15.0 * unit(rng),
                              40.0 + 40.0 * unit(rng), 2.0 * std::numbers::pi * unit(rng)};
    o.exit_frame = cfg.frames;
    o.depth = i;
    cfg.objects.push_back(o);
  }
  cfg.detector_noise.tp_score_mode = {0.75, 0.06};
  cfg.detector_noise.fp_score_mode = {0.3, 0.06};
  cfg.detector_noise.fp_rate = 0.5;
  cfg.detector_noise.fn_rate = 0.1;
  cfg.detector_noise.box_jitter = 0.12;
  return cfg;
}

std::vector<ScenarioConfig> ablation_suite(std::uint64_t seed, int count) {
  std::vector<ScenarioConfig> suite;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < count; ++s) {
    ScenarioConfig cfg;
    cfg.name = fmt::format("ablation-{:02d}", s);
    cfg.seed = seed * 1000003ULL + static_cast<std::uint64_t>(s);
    cfg.frames = 80;
    const int targets = 3 + static_cast<int>(unit(rng) * 3.0);
    const int distractors = 2;
    for (int i = 0; i < targets + distractors; ++i) {
      ObjectSpec o;
      o.shape = unit(rng) < 0.5 ? Shape::Ellipse : Shape::Rectangle;
      o.width = 26.0 + 14.0 * unit(rng);
      o.height = 22.0 + 12.0 * unit(rng);
      const double lane = 30.0 + 180.0 * (i + 0.5) / (targets + distractors);
      const double dir = unit(rng) < 0.5 ? -1.0 : 1.0;
      o.trajectory = Trajectory{160.0 - dir * 70.0 + 30.0 * (unit(rng) - 0.5), lane, dir * (0.6 + 0.8 * unit(rng)),
                                0.0, 0.0, 4.0, 50.0, 2.0 * std::numbers::pi * unit(rng)};
      o.exit_frame = cfg.frames;
      o.depth = i;
      o.distractor = i >= targets;
      cfg.objects.push_back(o);
    }
    // Score modes drift between sequences; a single global threshold cannot fit them all.
    const double fp_mean = 0.2 + 0.25 * static_cast<double>(s) / std::max(1, count - 1);
    cfg.detector_noise.fp_score_mode = {fp_mean, 0.05};
    cfg.detector_noise.tp_score_mode = {std::min(0.95, fp_mean + 0.35 + 0.05 * unit(rng)), 0.05};
    cfg.detector_noise.fp_rate = 0.6;
    cfg.detector_noise.fn_rate = 0.05;
    cfg.detector_noise.box_jitter = 0.04;
    suite.push_back(cfg);
  }
  return suite;
}

ScenarioConfig preset_scenario(const std::string& name, std::uint64_t seed) {
  if (name == "easy") {
    return easy_scenario(seed);
  }
  if (name == "crossing") {
    return crossing_scenario(seed);
  }
  if (name == "crowded") {
    return crowded_scenario(seed);
  }
  if (name.rfind("ablation-", 0) == 0) {
    int idx = -1;
    try {
      idx = std::stoi(name.substr(9));
    } catch (const std::exception&) {
    }
    if (idx >= 0 && idx < 10) {
      return ablation_suite(seed, 10)[static_cast<std::size_t>(idx)];
    }
  }
  throw ValidationError(fmt::format("unknown scenario preset '{}' (easy, crossing, crowded, ablation-0..9)", name));
}

}  // namespace zsmat
