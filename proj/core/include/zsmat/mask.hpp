#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zsmat/geometry.hpp"

namespace zsmat {

/// Binary raster mask stored as uncompressed COCO-style run lengths.
///
/// Runs alternate background/foreground in column-major order and always
/// start with a (possibly empty) background run. The stored form is
/// canonical: no zero-length runs apart from a leading one, no trailing
/// zero runs, so two masks are equal iff their runs are equal.
class BitMask {
 public:
  using Run = std::uint32_t;

  BitMask() = default;
  /// All-background mask.
  BitMask(int width, int height);

  /// Throws ValidationError when the runs do not sum to width * height.
  static BitMask from_runs(int width, int height, std::vector<Run> runs);
  /// `raster` is row-major, index y * width + x, nonzero = foreground.
  static BitMask from_raster(int width, int height, std::span<const std::uint8_t> raster);
  /// `indices` are sorted, unique column-major pixel indices (x * height + y).
  static BitMask from_indices(int width, int height, std::span<const std::uint32_t> indices);
  /// Pixels whose centers fall inside `box`.
  static BitMask from_box(const BBox& box, int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }
  const std::vector<Run>& runs() const { return runs_; }

  bool empty() const;
  bool contains(int x, int y) const;

  std::vector<std::uint8_t> to_raster() const;
  std::vector<std::uint32_t> foreground_indices() const;

  friend bool operator==(const BitMask&, const BitMask&) = default;

 private:
  BitMask(int width, int height, std::vector<Run> runs);
  void canonicalize();

  int width_ = 0;
  int height_ = 0;
  std::vector<Run> runs_;
};

std::int64_t mask_area(const BitMask& m);

/// |A ∩ B|. Throws DimensionMismatch when the rasters differ in size.
std::int64_t mask_intersection(const BitMask& a, const BitMask& b);

BitMask mask_and(const BitMask& a, const BitMask& b);
BitMask mask_or(const BitMask& a, const BitMask& b);
/// Foreground of `a` that is not foreground in `b`.
BitMask mask_subtract(const BitMask& a, const BitMask& b);

/// Tight box of the foreground; nullopt for an empty mask.
std::optional<BBox> mask_to_bbox(const BitMask& m);

}  // namespace zsmat
