#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "zsmat/segmenter.hpp"
#include "zsmat/synth.hpp"

namespace zsmat {

/// Inspection view of one oracle track.
struct OracleTrackInfo {
  int bound_object = -1;  // -1 when bound to nothing
  int last_prompt_frame = 0;
  double contamination = 0.0;
  int contaminant = -1;
  std::vector<int> contaminating_frames;  // every frame whose output latched onto an occluder
};

/// Simulated segmenter over a synthetic world.
///
/// A prompt binds the track to the present object whose visible box has the
/// largest IoU with the prompt box. Propagation returns the bound object's
/// visible mask, eroded by a deterministic per-pixel ordering as the track
/// ages since its last prompt, with occ = occ_of_visibility - age penalty.
/// When the bound object is occluded below snap_visibility the output
/// latches onto the occluder and the frame adds contamination; dropping that
/// frame's memory removes it again. Undropped contamination drifts the mask
/// toward the occluder and rebinds the track once it reaches 1.
class OracleSegmenter final : public SegmenterSession {
 public:
  explicit OracleSegmenter(std::shared_ptr<const World> world);

  void open(const SequenceInfo& info) override;
  MaskEntry prompt(int frame, int track_id, const BBox& box) override;
  std::vector<MaskEntry> propagate(int frame) override;
  DropAck drop_memory(int track_id, int frame) override;
  void close() override;

  std::optional<OracleTrackInfo> track_info(int track_id) const;
  std::vector<int> track_ids() const;

 private:
  struct Memory {
    int object = -1;
    int prompt_frame = 0;
    double contamination = 0.0;
    int contaminant = -1;
    std::map<int, double> deltas;  // undropped contamination per frame
  };
  struct TrackState {
    Memory memory;
    std::vector<std::pair<int, std::optional<Memory>>> prompts;  // (frame, memory before the prompt)
    std::set<int> dropped;
    std::vector<int> contaminating_frames;
  };

  MaskEntry output(int track_id, const TrackState& track, int frame) const;
  int occluder_of(int object, int frame) const;
  int bind(const BBox& box, int frame) const;

  std::shared_ptr<const World> world_;
  FrameClock clock_;
  std::map<int, TrackState> tracks_;
};

/// Session factory for serving the oracle over the wire.
std::unique_ptr<SegmenterSession> make_oracle_session(std::shared_ptr<const World> world);

}  // namespace zsmat
