#pragma once

// Grayscale rasters, Otsu thresholding, binary masks, 8-connected
// components and Sobel edge profiles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coloc/error.hpp"

namespace coloc {

/// Row-major raster of intensities in [0,1]. Both sides are at least 2 so
/// that a box with b > t and r > l always fits.
class GrayMap {
 public:
  GrayMap(int width, int height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width < 2 || height < 2) {
      throw Error(ErrorCode::MinimumSizeViolated,
                  "map is " + std::to_string(width) + "x" + std::to_string(height) +
                      ", need at least 2x2");
    }
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw Error(ErrorCode::InvalidMap, "value count does not match dimensions");
    }
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::InvalidMap, "intensity outside [0,1]");
      }
    }
  }

  /// Constant-valued map.
  static GrayMap filled(int width, int height, double value) {
    return GrayMap(width, height,
                   std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                           static_cast<std::size_t>(std::max(height, 0)),
                                       value));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  double at(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  double operator[](std::size_t index) const { return values_[index]; }

  bool same_shape(const GrayMap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayMap&, const GrayMap&) = default;

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

/// Row-major boolean raster.
class BinaryMask {
 public:
  BinaryMask(int width, int height)
      : width_(width),
        height_(height),
        bits_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool test(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  bool operator[](std::size_t index) const { return bits_[index] != 0; }
  void set(int row, int col, bool value = true) {
    bits_[static_cast<std::size_t>(row) * width_ + col] = value ? 1 : 0;
  }
  void set(std::size_t index, bool value = true) { bits_[index] = value ? 1 : 0; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }
  bool empty() const { return count() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Distinct row and column indices of edge pixels, both sorted ascending.
struct EdgeProfile {
  std::vector<int> rows;
  std::vector<int> cols;

  int min_row() const { return rows.front(); }
  int max_row() const { return rows.back(); }
  int min_col() const { return cols.front(); }
  int max_col() const { return cols.back(); }

  static EdgeProfile full_extent(int width, int height) {
    EdgeProfile profile;
    profile.rows.resize(static_cast<std::size_t>(height));
    profile.cols.resize(static_cast<std::size_t>(width));
    for (int i = 0; i < height; ++i) profile.rows[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < width; ++i) profile.cols[static_cast<std::size_t>(i)] = i;
    return profile;
  }
};

/// 8-bit histogram level of an intensity.
inline int quantize(double value) {
  return static_cast<int>(std::lround(std::clamp(value, 0.0, 1.0) * 255.0));
}

/// Otsu level over the 256-bin histogram of quantize(v). The returned
/// threshold sits halfway between the winning level and the next one, so
/// `v > threshold` selects exactly the pixels quantized above that level.
inline double otsu_threshold(const GrayMap& map) {
  std::array<double, 256> hist{};
  for (double v : map.values()) hist[static_cast<std::size_t>(quantize(v))] += 1.0;

  const double total = static_cast<double>(map.size());
  double total_sum = 0.0;
  for (int level = 0; level < 256; ++level) total_sum += level * hist[level];

  double best_variance = 0.0;
  int best_level = -1;
  double weight_bg = 0.0;
  double sum_bg = 0.0;
  for (int level = 0; level < 255; ++level) {
    weight_bg += hist[level];
    sum_bg += level * hist[level];
    const double weight_fg = total - weight_bg;
    if (weight_bg == 0.0 || weight_fg == 0.0) continue;
    const double mean_bg = sum_bg / weight_bg;
    const double mean_fg = (total_sum - sum_bg) / weight_fg;
    const double diff = mean_bg - mean_fg;
    const double variance = weight_bg * weight_fg * diff * diff;
    if (variance > best_variance) {
      best_variance = variance;
      best_level = level;
    }
  }
  if (best_level < 0) {
    throw Error(ErrorCode::DegenerateMap, "all pixels share one quantized level");
  }
  return (best_level + 0.5) / 255.0;
}

/// bit(p) = map(p) > threshold.
inline BinaryMask binarize(const GrayMap& map, double threshold) {
  BinaryMask mask(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) mask.set(i, map[i] > threshold);
  return mask;
}

/// Linear (row-major) pixel indices of one connected component.
using Component = std::vector<std::size_t>;

/// 8-connected components in raster-scan order of their first pixel.
inline std::vector<Component> connected_components(const BinaryMask& mask) {
  const int width = mask.width();
  const int height = mask.height();
  std::vector<std::uint8_t> visited(mask.size(), 0);
  std::vector<Component> components;
  std::vector<std::size_t> stack;

  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (!mask[seed] || visited[seed]) continue;
    Component component;
    visited[seed] = 1;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t index = stack.back();
      stack.pop_back();
      component.push_back(index);
      const int row = static_cast<int>(index / static_cast<std::size_t>(width));
      const int col = static_cast<int>(index % static_cast<std::size_t>(width));
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = row + dr;
          const int c = col + dc;
          if (r < 0 || r >= height || c < 0 || c >= width) continue;
          const std::size_t next = static_cast<std::size_t>(r) * width + c;
          if (mask[next] && !visited[next]) {
            visited[next] = 1;
            stack.push_back(next);
          }
        }
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

/// 3x3 Sobel gradient magnitude with replicated borders, divided by its
/// maximum. A constant image yields all zeros.
inline std::vector<double> sobel_magnitude(const GrayMap& image) {
  const int width = image.width();
  const int height = image.height();
  auto px = [&](int r, int c) {
    return image.at(std::clamp(r, 0, height - 1), std::clamp(c, 0, width - 1));
  };
  std::vector<double> magnitude(image.size(), 0.0);
  double peak = 0.0;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double gx = (px(r - 1, c + 1) + 2.0 * px(r, c + 1) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2.0 * px(r, c - 1) + px(r + 1, c - 1));
      const double gy = (px(r + 1, c - 1) + 2.0 * px(r + 1, c) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2.0 * px(r - 1, c) + px(r - 1, c + 1));
      const double g = std::hypot(gx, gy);
      magnitude[static_cast<std::size_t>(r) * width + c] = g;
      peak = std::max(peak, g);
    }
  }
  if (peak > 0.0) {
    for (double& g : magnitude) g /= peak;
  }
  return magnitude;
}

/// Rows and columns holding pixels with normalized Sobel magnitude
/// >= edge_threshold. Falls back to the full image extent when the edge set
/// is empty or collapses to a single row or column.
inline EdgeProfile edge_profile(const GrayMap& image, double edge_threshold) {
  const int width = image.width();
  const int height = image.height();
  const std::vector<double> magnitude = sobel_magnitude(image);

  std::vector<std::uint8_t> row_hit(static_cast<std::size_t>(height), 0);
  std::vector<std::uint8_t> col_hit(static_cast<std::size_t>(width), 0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (magnitude[static_cast<std::size_t>(r) * width + c] >= edge_threshold) {
        row_hit[static_cast<std::size_t>(r)] = 1;
        col_hit[static_cast<std::size_t>(c)] = 1;
      }
    }
  }
  EdgeProfile profile;
  for (int r = 0; r < height; ++r) {
    if (row_hit[static_cast<std::size_t>(r)]) profile.rows.push_back(r);
  }
  for (int c = 0; c < width; ++c) {
    if (col_hit[static_cast<std::size_t>(c)]) profile.cols.push_back(c);
  }
  if (profile.rows.size() < 2 || profile.cols.size() < 2) {
    return EdgeProfile::full_extent(width, height);
  }
  return profile;
}

}  // namespace coloc
