#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <sstream>
#include <string>

#include "coloc/error.hpp"
#include "coloc/imagery.hpp"

namespace coloc {

/// Axis-aligned box with inclusive pixel coordinates, always ordered
/// (top, bottom, left, right).
struct BoundingBox {
  int t = 0;
  int b = 1;
  int l = 0;
  int r = 1;

  std::int64_t height() const noexcept { return std::int64_t{b} - t + 1; }
  std::int64_t width() const noexcept { return std::int64_t{r} - l + 1; }
  std::int64_t area() const noexcept { return height() * width(); }

  bool contains(const BoundingBox& inner) const noexcept {
    return t <= inner.t && b >= inner.b && l <= inner.l && r >= inner.r;
  }
  bool contains_pixel(int row, int col) const noexcept {
    return row >= t && row <= b && col >= l && col <= r;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const BoundingBox& box) {
  return os << "(" << box.t << ", " << box.b << ", " << box.l << ", " << box.r << ")";
}

/// Continuous relaxation of a box, same component order.
using BoxVector = std::array<double, 4>;

inline BoxVector to_vector(const BoundingBox& box) {
  return {static_cast<double>(box.t), static_cast<double>(box.b), static_cast<double>(box.l),
          static_cast<double>(box.r)};
}

inline bool is_valid(const BoundingBox& box, int width, int height) noexcept {
  return box.b > box.t && box.r > box.l && box.t >= 0 && box.l >= 0 && box.b <= height - 1 &&
         box.r <= width - 1;
}

inline void require_valid(const BoundingBox& box, int width, int height) {
  if (!is_valid(box, width, height)) {
    std::ostringstream os;
    os << "box " << box << " invalid for " << width << "x" << height << " image";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

namespace detail {

// Widens [lo, hi] to at least two pixels without leaving [0, limit-1].
inline void expand_degenerate(int& lo, int& hi, int limit) {
  if (hi > lo) return;
  if (lo + 1 <= limit - 1) {
    hi = lo + 1;
  } else {
    lo = hi - 1;
  }
}

}  // namespace detail

/// Minimal box around all true pixels. A single-row (or single-column) extent
/// is widened by one pixel so that b > t and r > l hold.
inline BoundingBox tight_box(const BinaryMask& mask) {
  int top = mask.height();
  int bottom = -1;
  int left = mask.width();
  int right = -1;
  for (int row = 0; row < mask.height(); ++row) {
    for (int col = 0; col < mask.width(); ++col) {
      if (!mask.test(row, col)) continue;
      top = std::min(top, row);
      bottom = std::max(bottom, row);
      left = std::min(left, col);
      right = std::max(right, col);
    }
  }
  if (bottom < 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground pixels");
  detail::expand_degenerate(top, bottom, mask.height());
  detail::expand_degenerate(left, right, mask.width());
  return {top, bottom, left, right};
}

inline std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const std::int64_t rows = std::int64_t{std::min(a.b, b.b)} - std::max(a.t, b.t) + 1;
  const std::int64_t cols = std::int64_t{std::min(a.r, b.r)} - std::max(a.l, b.l) + 1;
  if (rows <= 0 || cols <= 0) return 0;
  return rows * cols;
}

/// Jaccard index of the two boxes as pixel sets.
inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline BoundingBox union_box(std::span<const BoundingBox> boxes) {
  if (boxes.empty()) throw Error(ErrorCode::EmptyList, "union_box needs at least one box");
  BoundingBox out = boxes.front();
  for (const BoundingBox& box : boxes.subspan(1)) {
    out.t = std::min(out.t, box.t);
    out.b = std::max(out.b, box.b);
    out.l = std::min(out.l, box.l);
    out.r = std::max(out.r, box.r);
  }
  return out;
}

/// Nearest-integer rounding, clamped to the image, with b > t and r > l
/// restored by pushing b (or t at the bottom border) apart.
inline BoundingBox round_to_box(const BoxVector& v, int width, int height) {
  auto snap = [](double x, int limit) {
    const double clamped = std::clamp(std::round(x), 0.0, static_cast<double>(limit - 1));
    return static_cast<int>(clamped);
  };
  BoundingBox box{snap(v[0], height), snap(v[1], height), snap(v[2], width), snap(v[3], width)};
  if (box.b <= box.t) {
    box.b = box.t + 1;
    if (box.b > height - 1) {
      box.b = height - 1;
      box.t = height - 2;
    }
  }
  if (box.r <= box.l) {
    box.r = box.l + 1;
    if (box.r > width - 1) {
      box.r = width - 1;
      box.l = width - 2;
    }
  }
  return box;
}

}  // namespace coloc
