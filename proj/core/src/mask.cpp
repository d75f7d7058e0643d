#include "zsmat/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "zsmat/errors.hpp"

namespace zsmat {

namespace {

void check_dims(int width, int height) {
  if (width < 0 || height < 0) {
    throw ValidationError(fmt::format("mask dimensions must be non-negative, got {}x{}", width, height));
  }
}

void check_same_dims(const BitMask& a, const BitMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionMismatch(
        fmt::format("mask dimensions differ: {}x{} vs {}x{}", a.width(), a.height(), b.width(), b.height()));
  }
}

// Walks both run lists in lockstep and emits runs of op(a, b).
template <typename Op>
std::vector<BitMask::Run> merge_runs(const BitMask& a, const BitMask& b, Op op) {
  const auto& ra = a.runs();
  const auto& rb = b.runs();
  std::vector<BitMask::Run> out;
  std::size_t ia = 0;
  std::size_t ib = 0;
  std::uint64_t left_a = ra.empty() ? 0 : ra[0];
  std::uint64_t left_b = rb.empty() ? 0 : rb[0];
  bool va = false;
  bool vb = false;
  bool current = false;
  std::uint64_t current_len = 0;
  std::uint64_t remaining = a.pixel_count();

  auto advance = [](const std::vector<BitMask::Run>& runs, std::size_t& idx, std::uint64_t& left, bool& value) {
    while (left == 0 && idx + 1 < runs.size()) {
      ++idx;
      left = runs[idx];
      value = !value;
    }
  };

  while (remaining > 0) {
    advance(ra, ia, left_a, va);
    advance(rb, ib, left_b, vb);
    const std::uint64_t step = std::min(left_a, left_b);
    const bool v = op(va, vb);
    if (v == current) {
      current_len += step;
    } else {
      out.push_back(static_cast<BitMask::Run>(current_len));
      current = v;
      current_len = step;
    }
    left_a -= step;
    left_b -= step;
    remaining -= step;
  }
  out.push_back(static_cast<BitMask::Run>(current_len));
  return out;
}

}  // namespace

BitMask::BitMask(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  if (pixel_count() > 0) {
    runs_.push_back(static_cast<Run>(pixel_count()));
  }
}

BitMask::BitMask(int width, int height, std::vector<Run> runs)
    : width_(width), height_(height), runs_(std::move(runs)) {
  canonicalize();
}

BitMask BitMask::from_runs(int width, int height, std::vector<Run> runs) {
  check_dims(width, height);
  const std::uint64_t total = std::accumulate(runs.begin(), runs.end(), std::uint64_t{0});
  const std::uint64_t expected = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  if (total != expected) {
    throw ValidationError(fmt::format("mask runs sum to {} but {}x{} mask has {} pixels", total, width,
                                      height, expected));
  }
  return BitMask(width, height, std::move(runs));
}

BitMask BitMask::from_raster(int width, int height, std::span<const std::uint8_t> raster) {
  check_dims(width, height);
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (raster.size() != n) {
    throw DimensionMismatch(fmt::format("raster has {} pixels, expected {}", raster.size(), n));
  }
  std::vector<Run> runs;
  bool value = false;
  Run len = 0;
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      const bool v = raster[static_cast<std::size_t>(y) * width + x] != 0;
      if (v != value) {
        runs.push_back(len);
        value = v;
        len = 0;
      }
      ++len;
    }
  }
  runs.push_back(len);
  return BitMask(width, height, std::move(runs));
}

BitMask BitMask::from_indices(int width, int height, std::span<const std::uint32_t> indices) {
  check_dims(width, height);
  const std::uint64_t n = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  std::vector<Run> runs;
  std::uint64_t pos = 0;
  std::size_t i = 0;
  while (i < indices.size()) {
    const std::uint64_t start = indices[i];
    if (start < pos || start >= n) {
      throw ValidationError("mask indices must be sorted, unique and inside the raster");
    }
    std::size_t j = i + 1;
    while (j < indices.size() && indices[j] == indices[j - 1] + 1) {
      ++j;
    }
    runs.push_back(static_cast<Run>(start - pos));
    runs.push_back(static_cast<Run>(j - i));
    pos = start + (j - i);
    i = j;
  }
  runs.push_back(static_cast<Run>(n - pos));
  return BitMask(width, height, std::move(runs));
}

BitMask BitMask::from_box(const BBox& box, int width, int height) {
  check_dims(width, height);
  // Pixel i is covered iff x <= i + 0.5 < x + w.
  const int x0 = std::max(0, static_cast<int>(std::ceil(box.x - 0.5)));
  const int x1 = std::min(width, static_cast<int>(std::ceil(box.right() - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(box.y - 0.5)));
  const int y1 = std::min(height, static_cast<int>(std::ceil(box.bottom() - 0.5)));
  if (x0 >= x1 || y0 >= y1) {
    return BitMask(width, height);
  }
  std::vector<Run> runs;
  std::uint64_t pos = 0;
  for (int x = x0; x < x1; ++x) {
    const std::uint64_t start = static_cast<std::uint64_t>(x) * height + y0;
    runs.push_back(static_cast<Run>(start - pos));
    runs.push_back(static_cast<Run>(y1 - y0));
    pos = start + (y1 - y0);
  }
  runs.push_back(static_cast<Run>(static_cast<std::uint64_t>(width) * height - pos));
  return BitMask(width, height, std::move(runs));
}

void BitMask::canonicalize() {
  std::vector<Run> out;
  out.reserve(runs_.size());
  bool value = false;
  bool out_value = false;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    const Run r = runs_[i];
    value = (i % 2) == 1;
    if (r == 0) {
      continue;
    }
    if (out.empty()) {
      if (value) {
        out.push_back(0);
      }
      out.push_back(r);
      out_value = value;
    } else if (value == out_value) {
      out.back() += r;
    } else {
      out.push_back(r);
      out_value = value;
    }
  }
  runs_ = std::move(out);
}

bool BitMask::empty() const { return runs_.size() <= 1; }

bool BitMask::contains(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) {
    return false;
  }
  const std::uint64_t idx = static_cast<std::uint64_t>(x) * height_ + y;
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    pos += runs_[i];
    if (idx < pos) {
      return (i % 2) == 1;
    }
  }
  return false;
}

std::vector<std::uint8_t> BitMask::to_raster() const {
  std::vector<std::uint8_t> raster(pixel_count(), 0);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t k = pos; k < pos + runs_[i]; ++k) {
        const std::uint64_t x = k / height_;
        const std::uint64_t y = k % height_;
        raster[y * width_ + x] = 1;
      }
    }
    pos += runs_[i];
  }
  return raster;
}

std::vector<std::uint32_t> BitMask::foreground_indices() const {
  std::vector<std::uint32_t> out;
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t k = pos; k < pos + runs_[i]; ++k) {
        out.push_back(static_cast<std::uint32_t>(k));
      }
    }
    pos += runs_[i];
  }
  return out;
}

std::int64_t mask_area(const BitMask& m) {
  std::int64_t area = 0;
  const auto& runs = m.runs();
  for (std::size_t i = 1; i < runs.size(); i += 2) {
    area += runs[i];
  }
  return area;
}

std::int64_t mask_intersection(const BitMask& a, const BitMask& b) {
  check_same_dims(a, b);
  if (a.empty() || b.empty()) {
    return 0;
  }
  return mask_area(mask_and(a, b));
}

BitMask mask_and(const BitMask& a, const BitMask& b) {
  check_same_dims(a, b);
  return BitMask::from_runs(a.width(), a.height(), merge_runs(a, b, [](bool x, bool y) { return x && y; }));
}

BitMask mask_or(const BitMask& a, const BitMask& b) {
  check_same_dims(a, b);
  return BitMask::from_runs(a.width(), a.height(), merge_runs(a, b, [](bool x, bool y) { return x || y; }));
}

BitMask mask_subtract(const BitMask& a, const BitMask& b) {
  check_same_dims(a, b);
  return BitMask::from_runs(a.width(), a.height(), merge_runs(a, b, [](bool x, bool y) { return x && !y; }));
}

std::optional<BBox> mask_to_bbox(const BitMask& m) {
  if (m.empty()) {
    return std::nullopt;
  }
  const std::uint64_t h = static_cast<std::uint64_t>(m.height());
  std::uint64_t xmin = UINT64_MAX;
  std::uint64_t xmax = 0;
  std::uint64_t ymin = UINT64_MAX;
  std::uint64_t ymax = 0;
  std::uint64_t pos = 0;
  const auto& runs = m.runs();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i % 2 == 1 && runs[i] > 0) {
      const std::uint64_t first = pos;
      const std::uint64_t last = pos + runs[i] - 1;
      const std::uint64_t c0 = first / h;
      const std::uint64_t c1 = last / h;
      xmin = std::min(xmin, c0);
      xmax = std::max(xmax, c1);
      if (c0 == c1) {
        ymin = std::min(ymin, first % h);
        ymax = std::max(ymax, last % h);
      } else {
        // A run crossing a column boundary touches the bottom row of c0 and the top row of c1.
        ymin = 0;
        ymax = h - 1;
      }
    }
    pos += runs[i];
  }
  return BBox{static_cast<double>(xmin), static_cast<double>(ymin), static_cast<double>(xmax - xmin + 1),
              static_cast<double>(ymax - ymin + 1)};
}

}  // namespace zsmat
