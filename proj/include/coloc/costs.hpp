#pragma once

// Spatial deviation ratios and the per-reference rejection cost matrices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "coloc/error.hpp"
#include "coloc/geometry.hpp"

namespace coloc {

/// 4x4 matrix indexed in (t, b, l, r) order.
using Matrix4 = std::array<std::array<double, 4>, 4>;

/// Rejection cost of one reference box. Off-diagonal entries are zero and
/// the diagonal is non-negative, so only the diagonal is stored.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(const std::array<double, 4>& diagonal) : diagonal_(diagonal) {
    for (double d : diagonal_) {
      if (!(d >= 0.0) || !std::isfinite(d)) {
        throw Error(ErrorCode::InvalidArgument, "cost diagonal must be finite and non-negative");
      }
    }
  }

  const std::array<double, 4>& diagonal() const noexcept { return diagonal_; }
  double operator()(std::size_t row, std::size_t col) const noexcept {
    return row == col ? diagonal_[row] : 0.0;
  }

  Matrix4 dense() const noexcept {
    Matrix4 m{};
    for (std::size_t i = 0; i < 4; ++i) m[i][i] = diagonal_[i];
    return m;
  }

  CostMatrix scaled(double factor) const {
    std::array<double, 4> d = diagonal_;
    for (double& x : d) x *= factor;
    return CostMatrix(d);
  }

  friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

 private:
  std::array<double, 4> diagonal_{};
};

/// Per-coordinate deviation of `reference` from `anchor`, normalized by the
/// image side it runs along. Off-diagonal entries are 1.
inline Matrix4 deviation_matrix(const BoundingBox& anchor, const BoundingBox& reference, int width,
                                int height) {
  Matrix4 rho;
  for (auto& row : rho) row.fill(1.0);
  rho[0][0] = std::abs(anchor.t - reference.t) / static_cast<double>(height);
  rho[1][1] = std::abs(anchor.b - reference.b) / static_cast<double>(height);
  rho[2][2] = std::abs(anchor.l - reference.l) / static_cast<double>(width);
  rho[3][3] = std::abs(anchor.r - reference.r) / static_cast<double>(width);
  return rho;
}

/// Half a pixel of normalized deviation on the longer image side.
inline double default_clamp_delta(int width, int height) {
  return 1.0 / (2.0 * std::max(width, height));
}

/// -jaccard * ln(clamp(rho, delta, 1)), elementwise. Off-diagonal ratios
/// are 1 and come out as zero; the clamp keeps an exact coordinate match
/// finite.
inline CostMatrix rejection_cost(double jaccard, const Matrix4& rho, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "clamp delta must lie in (0,1)");
  }
  std::array<double, 4> diagonal{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double cost = -jaccard * std::log(std::clamp(rho[i][i], delta, 1.0));
    diagonal[i] = cost + 0.0;  // turns -0.0 into +0.0
  }
  return CostMatrix(diagonal);
}

/// Cost of deviating from `reference`, judged against the anchored box.
inline CostMatrix rejection_cost(const BoundingBox& anchor, const BoundingBox& reference, int width,
                                 int height, double delta) {
  return rejection_cost(iou(anchor, reference), deviation_matrix(anchor, reference, width, height),
                        delta);
}

inline CostMatrix rejection_cost(const BoundingBox& anchor, const BoundingBox& reference, int width,
                                 int height) {
  return rejection_cost(anchor, reference, width, height, default_clamp_delta(width, height));
}

}  // namespace coloc
