#pragma once

#include <memory>
#include <string>
#include <vector>

#include "zsmat/config.hpp"
#include "zsmat/io.hpp"
#include "zsmat/segmenter.hpp"
#include "zsmat/synth.hpp"

namespace zsmat {

struct SequenceRun {
  std::string sequence_id;
  ThresholdSummary threshold;
  TrackTable predictions;
  std::vector<TrackEvent> events;
  int frames = 0;
};

/// Every detection score of a sequence.
std::vector<double> pooled_scores(const DetectionSequence& detections);

/// Threshold of a whole sequence under the configured mode.
ThresholdSummary sequence_threshold(const std::string& sequence_id, const DetectionSequence& detections,
                                    const RunConfig& cfg, int histogram_bins = 20);

/// Opens the session, tracks every frame of `info`, and closes it again.
/// Segmenter failures become TrackingAbort.
SequenceRun run_sequence(const SequenceInfo& info, const DetectionSequence& detections, SegmenterSession& session,
                         const RunConfig& cfg);

/// Tracks a synthetic scenario against its own oracle.
SequenceRun run_scenario(const Scenario& scenario, const RunConfig& cfg);

/// Builds the session named by cfg.segmenter; "oracle" needs a world.
std::unique_ptr<SegmenterSession> make_session(const std::string& endpoint, std::shared_ptr<const World> world);

}  // namespace zsmat
