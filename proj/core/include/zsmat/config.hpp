#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zsmat/threshold.hpp"
#include "zsmat/tracker.hpp"

namespace zsmat {

enum class ThresholdMode { Adaptive, Fixed };

struct RunConfig {
  ThresholdConfig threshold;
  ThresholdMode threshold_mode = ThresholdMode::Adaptive;
  double fixed_threshold = 0.3;
  TrackerConfig tracker;
  std::string segmenter = "oracle";  // oracle | exec:CMD | tcp:HOST:PORT
  std::vector<std::string> sequences;

  /// Throws ConfigError naming the offending keys.
  void validate() const;
};

/// Flat `key = value` text, `#` starts a comment. Keys:
///   delta tau_mask tau_iou tau_reliable tau_pending tau_lost n_lost n_frames
///   tau_miou tau_dscore tau_dstd tau_nms match_floor floor fallback
///   threshold (adaptive|fixed) fixed_threshold threshold_rule (boundary|centroid)
///   init_rule (mask|box) reconstruction (off|quality_band|density_aware|always)
///   cross_object mask_nms (true|false) segmenter sequences (comma separated)
/// Missing keys keep their defaults; unknown or repeated keys are rejected.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string config_to_text(const RunConfig& cfg);

}  // namespace zsmat
