#pragma once

// Map quality scores, the fused object prior and the anchored box.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "coloc/error.hpp"
#include "coloc/geometry.hpp"
#include "coloc/imagery.hpp"

namespace coloc {

inline constexpr double kMinQuality = 0.05;

struct QualityScores {
  double saliency = 1.0;
  double cosaliency = 1.0;
};

/// Foreground/background mean contrast under the map's Otsu split, floored
/// at kMinQuality. Throws DegenerateMap for single-level maps.
inline double quality_score(const GrayMap& map) {
  const double threshold = otsu_threshold(map);
  double fg_sum = 0.0;
  double bg_sum = 0.0;
  std::size_t fg_count = 0;
  for (double v : map.values()) {
    if (v > threshold) {
      fg_sum += v;
      ++fg_count;
    } else {
      bg_sum += v;
    }
  }
  const std::size_t bg_count = map.size() - fg_count;
  const double contrast = fg_sum / static_cast<double>(fg_count) -
                          bg_sum / static_cast<double>(bg_count);
  return std::max(contrast, kMinQuality);
}

/// Normalized saliency weight q_s / (q_s + q_c), snapped to a 2^-32 grid.
/// The snap absorbs the last-ulp noise of rescaled scores, so the weight
/// depends on the ratio q_s:q_c alone.
inline double saliency_weight(const QualityScores& q) {
  constexpr double kGrid = 4294967296.0;
  const double w = q.saliency / (q.saliency + q.cosaliency);
  return std::round(w * kGrid) / kGrid;
}

/// Copies S, except where S is below its Otsu threshold while C is above
/// its own; there the pixel takes the quality-weighted mean of S and C.
inline GrayMap absolute_prior(const GrayMap& saliency, const GrayMap& cosaliency,
                              const QualityScores& q) {
  if (!saliency.same_shape(cosaliency)) {
    throw Error(ErrorCode::DimensionMismatch, "saliency and co-saliency maps differ in size");
  }
  if (!(q.saliency > 0.0) || !(q.cosaliency > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "quality scores must be positive");
  }
  const double phi_s = otsu_threshold(saliency);
  const double phi_c = otsu_threshold(cosaliency);
  const double w_s = saliency_weight(q);
  const double w_c = 1.0 - w_s;

  std::vector<double> fused(saliency.size());
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    const double s = saliency[i];
    const double c = cosaliency[i];
    if (s < phi_s && c > phi_c) {
      fused[i] = w_s * s + w_c * c;
    } else {
      fused[i] = s;
    }
  }
  return GrayMap(saliency.width(), saliency.height(), std::move(fused));
}

/// Foreground regions of a prior map, extracted once and queried against
/// a moving mediator box.
class PriorRegions {
 public:
  explicit PriorRegions(const GrayMap& prior)
      : width_(prior.width()), height_(prior.height()) {
    const BinaryMask mask = binarize(prior, otsu_threshold(prior));
    for (const Component& component : connected_components(mask)) {
      Region region;
      region.pixels = component;
      region.extent = {std::numeric_limits<int>::max(), -1, std::numeric_limits<int>::max(), -1};
      for (std::size_t index : component) {
        const int row = static_cast<int>(index / static_cast<std::size_t>(width_));
        const int col = static_cast<int>(index % static_cast<std::size_t>(width_));
        region.extent.t = std::min(region.extent.t, row);
        region.extent.b = std::max(region.extent.b, row);
        region.extent.l = std::min(region.extent.l, col);
        region.extent.r = std::max(region.extent.r, col);
      }
      regions_.push_back(std::move(region));
    }
  }

  std::size_t region_count() const noexcept { return regions_.size(); }

  /// Tight box around every whole region touching `mediator`, or the
  /// mediator itself when nothing touches it.
  BoundingBox anchored(const BoundingBox& mediator) const {
    BinaryMask kept(width_, height_);
    bool any = false;
    for (const Region& region : regions_) {
      if (intersection_area(region.extent, mediator) == 0) continue;
      const bool touches = std::any_of(region.pixels.begin(), region.pixels.end(),
                                       [&](std::size_t index) {
                                         const auto w = static_cast<std::size_t>(width_);
                                         return mediator.contains_pixel(
                                             static_cast<int>(index / w),
                                             static_cast<int>(index % w));
                                       });
      if (!touches) continue;
      any = true;
      for (std::size_t index : region.pixels) kept.set(index);
    }
    if (!any) return mediator;
    return tight_box(kept);
  }

 private:
  struct Region {
    Component pixels;
    BoundingBox extent;
  };

  int width_;
  int height_;
  std::vector<Region> regions_;
};

/// Tight box around the Otsu foreground regions of `prior` that overlap
/// `mediator`. Regions are kept whole. Throws DegenerateMap when the prior
/// has a single level.
inline BoundingBox anchored_box(const GrayMap& prior, const BoundingBox& mediator) {
  require_valid(mediator, prior.width(), prior.height());
  return PriorRegions(prior).anchored(mediator);
}

}  // namespace coloc
