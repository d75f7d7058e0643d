#pragma once

#include <algorithm>
#include <cmath>
#include <string>

namespace zsmat {

/// Axis-aligned box in continuous pixel coordinates.
///
/// Pixel (i, j) is covered when its center (i + 0.5, j + 0.5) lies in
/// [x, x + w) x [y, y + h).
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  bool is_valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
           h > 0.0;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline double intersection_area(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  return iw * ih;
}

/// Segmenter-reported visibility confidence; logit-like, higher means more visible.
struct OcclusionScore {
  double value = 0.0;

  bool is_finite() const { return std::isfinite(value); }
  friend auto operator<=>(const OcclusionScore&, const OcclusionScore&) = default;
};

/// A single detector output for one frame.
struct Detection {
  int frame = 0;
  BBox bbox;
  double score = 0.0;
  std::string label;

  friend bool operator==(const Detection&, const Detection&) = default;
};

}  // namespace zsmat
