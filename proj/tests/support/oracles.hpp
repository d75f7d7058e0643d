#pragma once

// Independent reference implementations used by the tests. They trade speed
// for obviousness: exhaustive enumeration, dense rasters, direct counting.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "zsmat/geometry.hpp"
#include "zsmat/track_table.hpp"

namespace oracle {

// Exhaustive contiguous 2-partition of the sorted sample minimizing the
// within-cluster sum of squares, first minimum wins.
struct Split {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double low_max = 0.0;
  double high_min = 0.0;
};
Split best_split(std::span<const double> scores);

// Maximum total weight over all partial injections rows -> columns.
double best_assignment_value(const std::vector<std::vector<double>>& w);

// Dense column-major raster helpers.
using Raster = std::vector<std::uint8_t>;  // index x * height + y
Raster box_raster(const zsmat::BBox& box, int width, int height);
std::int64_t count(const Raster& r);

double box_iou(const zsmat::BBox& a, const zsmat::BBox& b);

// HOTA by definition: per-frame matching found by enumerating every
// injection, association scores counted per TP from the whole sequence.
struct HotaResult {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  double loca = 0.0;
  std::vector<double> hota_per_alpha;
  std::vector<double> assa_per_alpha;
};
HotaResult brute_hota(const zsmat::TrackTable& gt, const zsmat::TrackTable& pred, std::span<const double> alphas);

// CLEAR identity switches with per-frame enumeration of matchings.
long brute_idsw(const zsmat::TrackTable& gt, const zsmat::TrackTable& pred);

}  // namespace oracle
