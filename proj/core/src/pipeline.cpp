#include "zsmat/pipeline.hpp"

#include <fmt/format.h>

#include "zsmat/errors.hpp"
#include "zsmat/oracle.hpp"
#include "zsmat/transport.hpp"
#include "zsmat/wire.hpp"

namespace zsmat {

std::vector<double> pooled_scores(const DetectionSequence& detections) {
  std::vector<double> scores;
  for (const auto& frame : detections) {
    for (const auto& d : frame) {
      scores.push_back(d.score);
    }
  }
  return scores;
}

ThresholdSummary sequence_threshold(const std::string& sequence_id, const DetectionSequence& detections,
                                    const RunConfig& cfg, int histogram_bins) {
  ThresholdSummary s;
  s.sequence = sequence_id;
  const auto scores = pooled_scores(detections);
  s.result = compute_threshold(scores, cfg.threshold);
  double boundary = s.result.clustered ? s.result.tau - cfg.threshold.delta : -1.0;
  if (cfg.threshold_mode == ThresholdMode::Fixed) {
    s.adaptive = false;
    s.result.tau = cfg.fixed_threshold;
  }
  s.histogram = score_histogram(scores, histogram_bins, boundary);
  return s;
}

SequenceRun run_sequence(const SequenceInfo& info, const DetectionSequence& detections, SegmenterSession& session,
                         const RunConfig& cfg) {
  cfg.validate();
  SequenceRun run;
  run.sequence_id = info.sequence_id;
  run.frames = info.frames;
  run.threshold = sequence_threshold(info.sequence_id, detections, cfg);
  const double tau = run.threshold.result.tau;
  try {
    session.open(info);
    Tracker tracker(cfg.tracker, session, info.width, info.height);
    std::vector<Detection> kept;
    for (int f = 0; f < info.frames; ++f) {
      kept.clear();
      if (f < static_cast<int>(detections.size())) {
        for (const auto& d : detections[static_cast<std::size_t>(f)]) {
          if (d.score >= tau) {
            kept.push_back(d);
          }
        }
      }
      FrameResult r = tracker.step(f, kept);
      for (const auto& o : r.outputs) {
        run.predictions.push_back(TrackRow{f, o.track_id, o.bbox, 1.0, 1, 1.0});
      }
      run.events.insert(run.events.end(), r.events.begin(), r.events.end());
    }
    session.close();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrackingAbort(fmt::format("sequence '{}' aborted: {}", info.sequence_id, e.what()));
  }
  return run;
}

SequenceRun run_scenario(const Scenario& scenario, const RunConfig& cfg) {
  auto world = std::make_shared<const World>(scenario.world);
  OracleSegmenter session(world);
  const auto& c = scenario.world.config;
  return run_sequence(SequenceInfo{c.name, c.width, c.height, c.frames}, scenario.detections, session, cfg);
}

std::unique_ptr<SegmenterSession> make_session(const std::string& endpoint, std::shared_ptr<const World> world) {
  if (endpoint == "oracle") {
    if (!world) {
      throw ValidationError("the oracle segmenter needs a scenario (--scenario)");
    }
    return std::make_unique<OracleSegmenter>(std::move(world));
  }
  return std::make_unique<WireSession>(make_transport(endpoint));
}

}  // namespace zsmat
