#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coloc/costs.hpp"
#include "test_support.hpp"

namespace coloc {
namespace {

// Full 4x4 elementwise evaluation, no diagonal shortcut.
Matrix4 naive_cost(const BoundingBox& a, const BoundingBox& k, int w, int h, double delta) {
  const double j = iou(a, k);
  Matrix4 rho;
  for (auto& row : rho) row.fill(1.0);
  rho[0][0] = std::abs(a.t - k.t) / static_cast<double>(h);
  rho[1][1] = std::abs(a.b - k.b) / static_cast<double>(h);
  rho[2][2] = std::abs(a.l - k.l) / static_cast<double>(w);
  rho[3][3] = std::abs(a.r - k.r) / static_cast<double>(w);
  Matrix4 m{};
  for (int i = 0; i < 4; ++i) {
    for (int c = 0; c < 4; ++c) {
      const double x = std::min(std::max(rho[i][c], delta), 1.0);
      m[i][c] = -j * std::log(x);
    }
  }
  return m;
}

TEST(DeviationMatrix, IdenticalBoxes) {
  const Matrix4 rho = deviation_matrix({1, 5, 2, 6}, {1, 5, 2, 6}, 10, 10);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_EQ(rho[i][j], i == j ? 0.0 : 1.0);
  }
}

TEST(DeviationMatrix, HalfHeightTop) {
  const Matrix4 rho = deviation_matrix({0, 60, 10, 20}, {50, 60, 10, 20}, 40, 100);
  EXPECT_DOUBLE_EQ(rho[0][0], 0.5);
  EXPECT_EQ(rho[1][1], 0.0);
  EXPECT_EQ(rho[2][2], 0.0);
  EXPECT_EQ(rho[3][3], 0.0);
}

TEST(DeviationMatrix, MaximalVerticalDeviation) {
  const Matrix4 rho = deviation_matrix({0, 99, 0, 10}, {99, 99, 0, 10}, 50, 100);
  EXPECT_NEAR(rho[0][0], 0.99, 1e-12);
}

TEST(RejectionCost, DisjointBoxesCostNothing) {
  const CostMatrix m = rejection_cost(BoundingBox{0, 3, 0, 3}, BoundingBox{10, 14, 10, 14}, 20, 20);
  for (double d : m.diagonal()) EXPECT_EQ(d, 0.0);
  EXPECT_FALSE(std::signbit(m.diagonal()[0]));
}

TEST(RejectionCost, HandValues) {
  Matrix4 rho;
  for (auto& row : rho) row.fill(1.0);
  rho[0][0] = 0.5;
  rho[1][1] = 1.0;
  rho[2][2] = 0.0;
  rho[3][3] = 0.25;
  const CostMatrix m = rejection_cost(1.0, rho, 1.0 / 200.0);
  EXPECT_NEAR(m.diagonal()[0], 0.6931471805599453, 1e-9);
  EXPECT_EQ(m.diagonal()[1], 0.0);
  EXPECT_NEAR(m.diagonal()[2], 5.298317366548036, 1e-9);
  EXPECT_NEAR(m.diagonal()[3], 2.0 * 0.6931471805599453, 1e-9);

  // exact match in a 100x100 image pins at ln 200
  const BoundingBox box{10, 40, 10, 40};
  const CostMatrix pinned = rejection_cost(box, box, 100, 100);
  for (double d : pinned.diagonal()) EXPECT_NEAR(d, std::log(200.0), 1e-9);
  EXPECT_DOUBLE_EQ(default_clamp_delta(100, 100), 1.0 / 200.0);
}

TEST(RejectionCost, OffDiagonalsAreZero) {
  const CostMatrix m = rejection_cost(BoundingBox{2, 8, 2, 8}, BoundingBox{3, 9, 1, 8}, 20, 20);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) {
        EXPECT_EQ(m(i, j), 0.0);
      }
    }
  }
}

TEST(RejectionCost, IdentityRatiosGiveZeroMatrix) {
  Matrix4 rho;
  for (auto& row : rho) row.fill(1.0);
  const CostMatrix m = rejection_cost(1.0, rho, 0.01);
  for (double d : m.diagonal()) EXPECT_EQ(d, 0.0);
}

TEST(RejectionCost, MatchesNaiveElementwiseOracle) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    const int w = 4 + static_cast<int>(rng() % 60), h = 4 + static_cast<int>(rng() % 60);
    const BoundingBox a = testing::random_box(rng, w, h);
    const BoundingBox k = testing::random_box(rng, w, h);
    const double delta = default_clamp_delta(w, h);
    const CostMatrix m = rejection_cost(a, k, w, h, delta);
    const Matrix4 expected = naive_cost(a, k, w, h, delta);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(m(i, j), expected[i][j] + 0.0);
      }
      EXPECT_GE(m.diagonal()[i], 0.0);
      EXPECT_TRUE(std::isfinite(m.diagonal()[i]));
    }
  }
}

TEST(RejectionCost, CloserCoordinateCostsMore) {
  // Fixed J: only the top coordinate's deviation changes.
  Matrix4 rho;
  for (auto& row : rho) row.fill(1.0);
  double previous = -1.0;
  for (double ratio : {0.9, 0.5, 0.2, 0.05, 0.011}) {
    rho[0][0] = ratio;
    const double cost = rejection_cost(0.6, rho, 0.01).diagonal()[0];
    EXPECT_GT(cost, previous);
    previous = cost;
  }
}

TEST(RejectionCost, RejectsBadDelta) {
  EXPECT_THROW(rejection_cost(BoundingBox{0, 1, 0, 1}, BoundingBox{0, 1, 0, 1}, 4, 4, 0.0), Error);
  EXPECT_THROW(rejection_cost(BoundingBox{0, 1, 0, 1}, BoundingBox{0, 1, 0, 1}, 4, 4, 1.0), Error);
}

}  // namespace
}  // namespace coloc
