#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "zsmat/geometry.hpp"
#include "zsmat/threshold.hpp"
#include "zsmat/track_table.hpp"
#include "zsmat/tracker.hpp"

namespace zsmat {

/// Per-frame detections; index = 0-based frame.
using DetectionSequence = std::vector<std::vector<Detection>>;

// Detections JSONL: one record per frame, frames strictly increasing and 0-based:
//   {"frame":F,"detections":[{"bbox":[x,y,w,h],"score":s,"label":"..."}]}
// Frames without a record have no detections. `source` names the input in errors.
DetectionSequence parse_detections(std::istream& in, const std::string& source = "<detections>");
DetectionSequence load_detections(const std::string& path);
void write_detections(std::ostream& out, const DetectionSequence& detections);

// MOTChallenge CSV: frame,id,x,y,w,h,conf,class,visibility with 1-based frames.
TrackTable parse_mot(std::istream& in, const std::string& source = "<mot>");
TrackTable load_mot(const std::string& path);
void write_mot(std::ostream& out, const TrackTable& table);

// Event log: one JSON object per event.
std::string event_to_json(const TrackEvent& event);
void write_events(std::ostream& out, const std::vector<TrackEvent>& events);

/// Threshold summary for one sequence, consumed by `report`.
struct ThresholdSummary {
  std::string sequence;
  bool adaptive = true;
  ThresholdResult result;
  std::vector<HistogramBin> histogram;
};
std::string threshold_summary_to_json(const ThresholdSummary& summary);
ThresholdSummary threshold_summary_from_json(const std::string& text, const std::string& source);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace zsmat
