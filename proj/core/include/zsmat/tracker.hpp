#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zsmat/geometry.hpp"
#include "zsmat/mask.hpp"
#include "zsmat/segmenter.hpp"

namespace zsmat {

enum class TrackState { Reliable, Pending, Suspicious, Lost, Terminated };
const char* to_string(TrackState state);

/// How unmatched detections become tracks.
enum class InitRule {
  Mask,  // prompt, then create iff max NMI against existing masks < tau_mask
  Box,   // create iff more than half of the box's pixels are not covered by any track mask
};

/// When a matched detection re-prompts its track.
enum class ReconstructionMode {
  Off,
  QualityBand,   // tau_pending < occ < tau_reliable
  DensityAware,  // quality band and best-vs-second IoU gap > tau_iou
  Always,        // every matched pair
};

const char* to_string(InitRule rule);
const char* to_string(ReconstructionMode mode);

struct TrackerConfig {
  double tau_mask = 0.4;
  double tau_iou = 0.3;
  double tau_reliable = 8.0;
  double tau_pending = 6.0;
  double tau_lost = 2.0;
  int n_lost = 25;
  int n_frames = 10;
  double tau_miou = 0.8;
  double tau_dscore = 2.0;
  double tau_dstd = 0.2;
  double tau_nms = 0.95;
  double match_floor = 0.1;
  InitRule init_rule = InitRule::Mask;
  ReconstructionMode reconstruction = ReconstructionMode::DensityAware;
  bool cross_object = true;
  bool mask_nms = true;

  /// Throws ConfigError.
  void validate() const;
};

struct Track {
  int id = 0;
  TrackState state = TrackState::Reliable;
  BitMask mask;
  std::optional<BBox> bbox;  // mask_to_bbox(mask)
  OcclusionScore occ;
  std::deque<double> occ_history;  // last n_frames scores
  int lost_streak = 0;
  int born_frame = 0;
  int last_prompt_frame = 0;

  double occ_mean() const;
  double occ_std() const;  // population
};

enum class EventKind { Created, Rejected, Reprompted, MemoryDropped, Suppressed, Terminated };
const char* to_string(EventKind kind);

struct TrackEvent {
  EventKind kind = EventKind::Created;
  int frame = 0;
  int track_id = 0;
  int other_id = -1;  // partner track, when one exists
  std::string reason;
  double value = 0.0;  // NMI, IoU gap, mask IoU or lost streak depending on the event
  std::optional<BBox> box;

  friend bool operator==(const TrackEvent&, const TrackEvent&) = default;
};

struct TrackOutput {
  int track_id = 0;
  BBox bbox;
  BitMask mask;
  OcclusionScore occ;
  TrackState state = TrackState::Reliable;
};

struct FrameResult {
  int frame = 0;
  std::vector<TrackOutput> outputs;
  std::vector<TrackEvent> events;
};

/// State label for an occlusion score (never Terminated).
TrackState classify(double occ, const TrackerConfig& cfg);

/// Appends occ to the history, updates the lost streak and the state.
void update_lifecycle(Track& track, OcclusionScore occ, const TrackerConfig& cfg);

/// |det ∩ track| / |det|; 0 for an empty detection mask.
double nmi(const BitMask& det_mask, const BitMask& track_mask);

struct InitDecision {
  bool create = false;
  double value = 0.0;  // max NMI, or the uncovered box fraction for InitRule::Box
  std::string reason;
};

/// Mask rule on an already prompted mask; max over no tracks is 0.
InitDecision decide_mask_init(const BitMask& det_mask, std::span<const Track> tracks, const TrackerConfig& cfg);
/// Box rule; needs no prompt.
InitDecision decide_box_init(const BBox& box, int width, int height, std::span<const Track> tracks);

struct GateDecision {
  bool reprompt = false;
  double best = 0.0;
  double second = 0.0;
  std::optional<std::size_t> best_track;
  double gap() const { return best - second; }
};

/// Re-prompt decision for a detection matched to tracks[matched]. The IoUs
/// are taken against every track box; the second best is 0 with one track.
GateDecision reconstruction_gate(const BBox& det, std::size_t matched, std::span<const Track> tracks,
                                 const TrackerConfig& cfg);

struct OcclusionVerdict {
  std::size_t occluded = 0;
  std::size_t other = 0;
  std::string reason;  // "occ_mean" or "occ_std"
  double mask_iou = 0.0;
};

/// Pairs with mask IoU > tau_miou; at most one verdict per occluded track.
std::vector<OcclusionVerdict> cross_object_interaction(std::span<const Track> tracks, const TrackerConfig& cfg);

struct Suppression {
  std::size_t suppressed = 0;
  std::size_t kept = 0;
  double mask_iou = 0.0;
};

/// Greedy output suppression: higher occ wins, then the older track, then the
/// lower id. Only indices listed in `candidates` take part.
std::vector<Suppression> mask_nms(std::span<const Track> tracks, std::span<const std::size_t> candidates,
                                  const TrackerConfig& cfg);

/// Per-sequence tracking state machine over a segmenter session. The
/// session must already be open.
class Tracker {
 public:
  Tracker(TrackerConfig cfg, SegmenterSession& session, int width, int height);

  /// Processes one frame; detections are expected to be thresholded already.
  FrameResult step(int frame, std::span<const Detection> detections);

  std::span<const Track> tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }
  int next_id() const { return next_id_; }

 private:
  void propagate(int frame);
  void interact(int frame, FrameResult& result);
  void initialize(int frame, const Detection& det, FrameResult& result);
  void apply_prompt(Track& track, MaskEntry entry);

  TrackerConfig cfg_;
  SegmenterSession& session_;
  int width_;
  int height_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
};

}  // namespace zsmat
