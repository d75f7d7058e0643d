#include "zsmat/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "zsmat/association.hpp"
#include "zsmat/errors.hpp"

namespace zsmat {

const char* to_string(TrackState state) {
  switch (state) {
    case TrackState::Reliable:
      return "Reliable";
    case TrackState::Pending:
      return "Pending";
    case TrackState::Suspicious:
      return "Suspicious";
    case TrackState::Lost:
      return "Lost";
    case TrackState::Terminated:
      return "Terminated";
  }
  return "?";
}

const char* to_string(InitRule rule) { return rule == InitRule::Mask ? "mask" : "box"; }

const char* to_string(ReconstructionMode mode) {
  switch (mode) {
    case ReconstructionMode::Off:
      return "off";
    case ReconstructionMode::QualityBand:
      return "quality_band";
    case ReconstructionMode::DensityAware:
      return "density_aware";
    case ReconstructionMode::Always:
      return "always";
  }
  return "?";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Created:
      return "Created";
    case EventKind::Rejected:
      return "Rejected";
    case EventKind::Reprompted:
      return "Reprompted";
    case EventKind::MemoryDropped:
      return "MemoryDropped";
    case EventKind::Suppressed:
      return "Suppressed";
    case EventKind::Terminated:
      return "Terminated";
  }
  return "?";
}

void TrackerConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  std::vector<std::string> bad;
  if (!(tau_mask > 0.0 && tau_mask <= 1.0)) bad.emplace_back("tau_mask");
  if (!unit(tau_iou)) bad.emplace_back("tau_iou");
  if (!(tau_reliable > tau_pending && tau_pending > tau_lost)) bad.emplace_back("tau_reliable/tau_pending/tau_lost");
  if (n_lost < 1) bad.emplace_back("n_lost");
  if (n_frames < 1) bad.emplace_back("n_frames");
  if (!unit(tau_miou)) bad.emplace_back("tau_miou");
  if (!(tau_dscore >= 0.0)) bad.emplace_back("tau_dscore");
  if (!(tau_dstd >= 0.0)) bad.emplace_back("tau_dstd");
  if (!unit(tau_nms)) bad.emplace_back("tau_nms");
  if (!unit(match_floor)) bad.emplace_back("match_floor");
  if (!bad.empty()) {
    throw ConfigError(fmt::format("invalid tracker parameters: {}", fmt::join(bad, ", ")));
  }
}

double Track::occ_mean() const {
  if (occ_history.empty()) {
    return occ.value;
  }
  return std::accumulate(occ_history.begin(), occ_history.end(), 0.0) / static_cast<double>(occ_history.size());
}

double Track::occ_std() const {
  if (occ_history.size() < 2) {
    return 0.0;
  }
  const double m = occ_mean();
  double ss = 0.0;
  for (double v : occ_history) {
    ss += (v - m) * (v - m);
  }
  return std::sqrt(ss / static_cast<double>(occ_history.size()));
}

TrackState classify(double occ, const TrackerConfig& cfg) {
  if (occ >= cfg.tau_reliable) {
    return TrackState::Reliable;
  }
  if (occ > cfg.tau_pending) {
    return TrackState::Pending;
  }
  if (occ >= cfg.tau_lost) {
    return TrackState::Suspicious;
  }
  return TrackState::Lost;
}

void update_lifecycle(Track& track, OcclusionScore occ, const TrackerConfig& cfg) {
  track.occ = occ;
  track.occ_history.push_back(occ.value);
  while (static_cast<int>(track.occ_history.size()) > cfg.n_frames) {
    track.occ_history.pop_front();
  }
  track.lost_streak = occ.value < cfg.tau_lost ? track.lost_streak + 1 : 0;
  track.state = track.lost_streak >= cfg.n_lost ? TrackState::Terminated : classify(occ.value, cfg);
}

double nmi(const BitMask& det_mask, const BitMask& track_mask) {
  const auto area = mask_area(det_mask);
  if (area == 0) {
    return 0.0;
  }
  return static_cast<double>(mask_intersection(det_mask, track_mask)) / static_cast<double>(area);
}

InitDecision decide_mask_init(const BitMask& det_mask, std::span<const Track> tracks, const TrackerConfig& cfg) {
  if (det_mask.empty()) {
    return InitDecision{false, 0.0, "empty_mask"};
  }
  double worst = 0.0;
  for (const auto& t : tracks) {
    worst = std::max(worst, nmi(det_mask, t.mask));
  }
  return InitDecision{worst < cfg.tau_mask, worst, "nmi"};
}

InitDecision decide_box_init(const BBox& box, int width, int height, std::span<const Track> tracks) {
  const BitMask region = BitMask::from_box(box, width, height);
  const auto area = mask_area(region);
  if (area == 0) {
    return InitDecision{false, 0.0, "empty_box"};
  }
  BitMask covered(width, height);
  for (const auto& t : tracks) {
    covered = mask_or(covered, t.mask);
  }
  const double free = static_cast<double>(mask_area(mask_subtract(region, covered))) / static_cast<double>(area);
  return InitDecision{free > 0.5, free, "unassigned"};
}

GateDecision reconstruction_gate(const BBox& det, std::size_t matched, std::span<const Track> tracks,
                                 const TrackerConfig& cfg) {
  GateDecision g;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const double v = tracks[i].bbox ? iou(det, *tracks[i].bbox) : 0.0;
    if (!g.best_track || v > g.best) {
      g.second = g.best_track ? g.best : 0.0;
      g.best = v;
      g.best_track = i;
    } else if (v > g.second) {
      g.second = v;
    }
  }
  if (matched >= tracks.size()) {
    return g;
  }
  const double occ = tracks[matched].occ.value;
  g.reprompt = g.gap() > cfg.tau_iou && occ > cfg.tau_pending && occ < cfg.tau_reliable && g.best_track == matched;
  return g;
}

std::vector<OcclusionVerdict> cross_object_interaction(std::span<const Track> tracks, const TrackerConfig& cfg) {
  std::vector<OcclusionVerdict> out;
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].mask.empty()) {
      continue;
    }
    for (std::size_t j = i + 1; j < tracks.size(); ++j) {
      if (tracks[j].mask.empty()) {
        continue;
      }
      const double m = mask_iou(tracks[i].mask, tracks[j].mask);
      if (!(m > cfg.tau_miou)) {
        continue;
      }
      const double mi = tracks[i].occ_mean();
      const double mj = tracks[j].occ_mean();
      OcclusionVerdict v;
      v.mask_iou = m;
      if (std::abs(mi - mj) > cfg.tau_dscore) {
        v.occluded = mi < mj ? i : j;
        v.reason = "occ_mean";
      } else {
        const double si = tracks[i].occ_std();
        const double sj = tracks[j].occ_std();
        if (!(std::abs(si - sj) > cfg.tau_dstd)) {
          continue;
        }
        v.occluded = si > sj ? i : j;
        v.reason = "occ_std";
      }
      v.other = v.occluded == i ? j : i;
      if (seen.insert(v.occluded).second) {
        out.push_back(v);
      }
    }
  }
  return out;
}

std::vector<Suppression> mask_nms(std::span<const Track> tracks, std::span<const std::size_t> candidates,
                                  const TrackerConfig& cfg) {
  std::vector<std::size_t> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ta = tracks[a];
    const auto& tb = tracks[b];
    if (ta.occ.value != tb.occ.value) {
      return ta.occ.value > tb.occ.value;
    }
    if (ta.born_frame != tb.born_frame) {
      return ta.born_frame < tb.born_frame;
    }
    return ta.id < tb.id;
  });
  std::vector<Suppression> out;
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    bool suppressed = false;
    for (std::size_t k : kept) {
      const double m = mask_iou(tracks[idx].mask, tracks[k].mask);
      if (m > cfg.tau_nms) {
        out.push_back(Suppression{idx, k, m});
        suppressed = true;
        break;
      }
    }
    if (!suppressed) {
      kept.push_back(idx);
    }
  }
  return out;
}

Tracker::Tracker(TrackerConfig cfg, SegmenterSession& session, int width, int height)
    : cfg_(cfg), session_(session), width_(width), height_(height) {
  cfg_.validate();
}

void Tracker::apply_prompt(Track& track, MaskEntry entry) {
  track.mask = std::move(entry.mask);
  track.bbox = mask_to_bbox(track.mask);
  track.occ = entry.occ;
}

void Tracker::propagate(int frame) {
  auto entries = session_.propagate(frame);
  std::map<int, MaskEntry*> by_id;
  for (auto& e : entries) {
    by_id[e.track_id] = &e;
  }
  for (auto& t : tracks_) {
    auto it = by_id.find(t.id);
    if (it == by_id.end()) {
      throw ProtocolError(fmt::format("segmenter returned no mask for active track {} at frame {}", t.id, frame));
    }
    if (it->second->mask.width() != width_ || it->second->mask.height() != height_) {
      throw ProtocolError(fmt::format("mask for track {} has the wrong size", t.id));
    }
    t.mask = std::move(it->second->mask);
    t.bbox = mask_to_bbox(t.mask);
    t.occ = it->second->occ;
  }
}

void Tracker::interact(int frame, FrameResult& result) {
  for (const auto& v : cross_object_interaction(tracks_, cfg_)) {
    const Track& t = tracks_[v.occluded];
    session_.drop_memory(t.id, frame);
    result.events.push_back(TrackEvent{EventKind::MemoryDropped, frame, t.id, tracks_[v.other].id, v.reason,
                                       v.mask_iou, std::nullopt});
  }
}

void Tracker::initialize(int frame, const Detection& det, FrameResult& result) {
  if (cfg_.init_rule == InitRule::Box) {
    const auto d = decide_box_init(det.bbox, width_, height_, tracks_);
    if (!d.create) {
      result.events.push_back(TrackEvent{EventKind::Rejected, frame, 0, -1, d.reason, d.value, det.bbox});
      return;
    }
  }
  const int id = next_id_++;
  MaskEntry entry = session_.prompt(frame, id, det.bbox);
  InitDecision d;
  if (cfg_.init_rule == InitRule::Mask) {
    d = decide_mask_init(entry.mask, tracks_, cfg_);
  } else {
    d = entry.mask.empty() ? InitDecision{false, 0.0, "empty_mask"} : InitDecision{true, 0.0, "unassigned"};
  }
  if (!d.create) {
    session_.drop_memory(id, frame);
    result.events.push_back(TrackEvent{EventKind::Rejected, frame, id, -1, d.reason, d.value, det.bbox});
    return;
  }
  Track t;
  t.id = id;
  t.born_frame = frame;
  t.last_prompt_frame = frame;
  const OcclusionScore occ = entry.occ;
  apply_prompt(t, std::move(entry));
  update_lifecycle(t, occ, cfg_);
  tracks_.push_back(std::move(t));
  result.events.push_back(TrackEvent{EventKind::Created, frame, id, -1, d.reason, d.value, det.bbox});
}

FrameResult Tracker::step(int frame, std::span<const Detection> detections) {
  FrameResult result;
  result.frame = frame;

  // (1) propagate, (2) lifecycle
  propagate(frame);
  std::vector<Track> dying;
  for (auto& t : tracks_) {
    update_lifecycle(t, t.occ, cfg_);
  }
  for (auto it = tracks_.begin(); it != tracks_.end();) {
    if (it->state == TrackState::Terminated) {
      dying.push_back(std::move(*it));
      it = tracks_.erase(it);
    } else {
      ++it;
    }
  }

  // (3) cross-object interaction
  if (cfg_.cross_object) {
    interact(frame, result);
  }

  // (4) association
  ScoreMatrix m(detections.size(), tracks_.size());
  for (std::size_t d = 0; d < detections.size(); ++d) {
    for (std::size_t k = 0; k < tracks_.size(); ++k) {
      m(d, k) = tracks_[k].bbox ? iou(detections[d].bbox, *tracks_[k].bbox) : 0.0;
    }
  }
  const Assignment a = hungarian_match(m, cfg_.match_floor);

  // (5) reconstruction; every decision sees the boxes from propagation
  std::vector<std::pair<std::size_t, GateDecision>> reprompts;
  for (const auto& [d, k] : a.pairs) {
    GateDecision g = reconstruction_gate(detections[d].bbox, k, tracks_, cfg_);
    const double occ = tracks_[k].occ.value;
    switch (cfg_.reconstruction) {
      case ReconstructionMode::Off:
        g.reprompt = false;
        break;
      case ReconstructionMode::QualityBand:
        g.reprompt = occ > cfg_.tau_pending && occ < cfg_.tau_reliable;
        break;
      case ReconstructionMode::DensityAware:
        break;
      case ReconstructionMode::Always:
        g.reprompt = true;
        break;
    }
    if (g.reprompt) {
      reprompts.emplace_back(d, g);
    }
  }
  for (const auto& [d, g] : reprompts) {
    const auto k = std::find_if(a.pairs.begin(), a.pairs.end(), [&](const auto& p) { return p.first == d; })->second;
    Track& t = tracks_[k];
    apply_prompt(t, session_.prompt(frame, t.id, detections[d].bbox));
    t.last_prompt_frame = frame;
    result.events.push_back(TrackEvent{EventKind::Reprompted, frame, t.id, -1, to_string(cfg_.reconstruction),
                                       g.gap(), detections[d].bbox});
  }

  // (6) initialization, highest score first
  std::vector<std::size_t> pending = a.unmatched_detections;
  std::stable_sort(pending.begin(), pending.end(),
                   [&](std::size_t x, std::size_t y) { return detections[x].score > detections[y].score; });
  for (std::size_t d : pending) {
    initialize(frame, detections[d], result);
  }

  // (7) termination
  for (const auto& t : dying) {
    result.events.push_back(
        TrackEvent{EventKind::Terminated, frame, t.id, -1, "lost", static_cast<double>(t.lost_streak), std::nullopt});
  }

  // (8) output with mask NMS
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < tracks_.size(); ++k) {
    if (tracks_[k].state != TrackState::Lost && tracks_[k].bbox) {
      candidates.push_back(k);
    }
  }
  std::set<std::size_t> suppressed;
  if (cfg_.mask_nms) {
    for (const auto& s : mask_nms(tracks_, candidates, cfg_)) {
      suppressed.insert(s.suppressed);
      result.events.push_back(TrackEvent{EventKind::Suppressed, frame, tracks_[s.suppressed].id, tracks_[s.kept].id,
                                         "mask_iou", s.mask_iou, std::nullopt});
    }
  }
  for (std::size_t k : candidates) {
    if (suppressed.count(k) == 0) {
      const auto& t = tracks_[k];
      result.outputs.push_back(TrackOutput{t.id, *t.bbox, t.mask, t.occ, t.state});
    }
  }
  return result;
}

}  // namespace zsmat
