#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "zsmat/geometry.hpp"
#include "zsmat/mask.hpp"

namespace zsmat {

/// Dense row-major matrix; rows are detections, columns tracks.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (detection, track), sorted by detection
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::size_t> unmatched_tracks;
};

double iou(const BBox& a, const BBox& b);

/// |A ∩ B| / |A ∪ B|; 0 when both masks are empty. Throws DimensionMismatch.
double mask_iou(const BitMask& a, const BitMask& b);

/// Minimum-cost perfect assignment on a rectangular matrix (shortest
/// augmenting paths, O(n^3)). Returns the column of every row, or -1 for
/// rows left over when there are more rows than columns.
std::vector<int> solve_min_cost(const ScoreMatrix& cost);

/// Maximum-total-IoU bipartite matching. Pairs with IoU below `match_floor`
/// (or equal to zero) are never matched.
Assignment hungarian_match(const ScoreMatrix& iou_matrix, double match_floor);

}  // namespace zsmat
