#pragma once

#include <vector>

#include "zsmat/geometry.hpp"

namespace zsmat {

/// One box of one identity in one frame. Frames are 0-based in memory and
/// 1-based on disk (MOTChallenge).
struct TrackRow {
  int frame = 0;
  int id = 0;
  BBox box;
  double conf = 1.0;
  int cls = 1;
  double visibility = 1.0;

  friend bool operator==(const TrackRow&, const TrackRow&) = default;
};

using TrackTable = std::vector<TrackRow>;

}  // namespace zsmat
