#include "zsmat/association.hpp"

#include <algorithm>
#include <limits>

namespace zsmat {

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) {
    return 0.0;
  }
  // Areas from the same corner differences as the intersection, so iou(a, a) == 1 exactly.
  const double area_a = (a.right() - a.x) * (a.bottom() - a.y);
  const double area_b = (b.right() - b.x) * (b.bottom() - b.y);
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double mask_iou(const BitMask& a, const BitMask& b) {
  const auto inter = mask_intersection(a, b);
  const auto uni = mask_area(a) + mask_area(b) - inter;
  if (uni == 0) {
    return 0.0;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<int> solve_min_cost(const ScoreMatrix& cost) {
  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();
  std::vector<int> result(rows, -1);
  if (rows == 0 || cols == 0) {
    return result;
  }
  // Pad to square with zero-cost dummies; padding never changes which real
  // pairs are optimal.
  const std::size_t n = std::max(rows, cols);
  auto at = [&](std::size_t r, std::size_t c) { return (r < rows && c < cols) ? cost(r, c) : 0.0; };

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials and matching, column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> match_col(n + 1, 0);  // match_col[c] = row matched to column c
  std::vector<std::size_t> way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    match_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match_col[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t r = match_col[j];
    if (r >= 1 && r <= rows && j <= cols) {
      result[r - 1] = static_cast<int>(j - 1);
    }
  }
  return result;
}

Assignment hungarian_match(const ScoreMatrix& iou_matrix, double match_floor) {
  const std::size_t rows = iou_matrix.rows();
  const std::size_t cols = iou_matrix.cols();
  Assignment out;

  auto admissible = [&](std::size_t r, std::size_t c) {
    const double w = iou_matrix(r, c);
    return w > 0.0 && w >= match_floor;
  };

  if (rows > 0 && cols > 0) {
    // Inadmissible pairs cost the same as staying unmatched.
    ScoreMatrix cost(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        cost(r, c) = admissible(r, c) ? -iou_matrix(r, c) : 0.0;
      }
    }
    const auto assigned = solve_min_cost(cost);
    for (std::size_t r = 0; r < rows; ++r) {
      const int c = assigned[r];
      if (c >= 0 && admissible(r, static_cast<std::size_t>(c))) {
        out.pairs.emplace_back(r, static_cast<std::size_t>(c));
      }
    }
  }

  std::vector<bool> det_used(rows, false);
  std::vector<bool> trk_used(cols, false);
  for (const auto& [d, t] : out.pairs) {
    det_used[d] = true;
    trk_used[t] = true;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (!det_used[r]) {
      out.unmatched_detections.push_back(r);
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!trk_used[c]) {
      out.unmatched_tracks.push_back(c);
    }
  }
  return out;
}

}  // namespace zsmat
