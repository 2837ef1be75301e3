#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "coloc/geometry.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace coloc {
namespace {

using testing::iou_by_enumeration;

TEST(TightBox, ExtremePixels) {
  BinaryMask mask(10, 10);
  mask.set(2, 3);
  mask.set(5, 7);
  EXPECT_EQ(tight_box(mask), (BoundingBox{2, 5, 3, 7}));
}

TEST(TightBox, FullMask) {
  BinaryMask mask(10, 10);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.set(i);
  EXPECT_EQ(tight_box(mask), (BoundingBox{0, 9, 0, 9}));
}

TEST(TightBox, SinglePixelExpands) {
  BinaryMask mask(10, 10);
  mask.set(4, 4);
  EXPECT_EQ(tight_box(mask), (BoundingBox{4, 5, 4, 5}));
  BinaryMask corner(10, 10);
  corner.set(9, 9);
  EXPECT_EQ(tight_box(corner), (BoundingBox{8, 9, 8, 9}));
}

TEST(TightBox, EmptyMaskThrows) {
  try {
    tight_box(BinaryMask(4, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMask);
  }
}

TEST(Iou, Examples) {
  const BoundingBox a{0, 9, 0, 9};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {20, 25, 20, 25}), 0.0);
  const BoundingBox b{5, 14, 5, 14};
  EXPECT_NEAR(iou(a, b), 25.0 / 175.0, 1e-15);
  EXPECT_DOUBLE_EQ(iou(a, b), iou_by_enumeration(a, b, 20, 20));
}

TEST(Iou, MatchesEnumerationAndIsSymmetric) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 300; ++i) {
    const BoundingBox a = testing::random_box(rng, 32, 32);
    const BoundingBox b = testing::random_box(rng, 32, 32);
    const double v = iou(a, b);
    EXPECT_EQ(v, iou_by_enumeration(a, b, 32, 32));
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(iou(a, a), 1.0);
  }
}

TEST(UnionBox, Examples) {
  const std::vector<BoundingBox> one{{1, 4, 2, 6}};
  EXPECT_EQ(union_box(one), one[0]);
  const std::vector<BoundingBox> two{{0, 3, 0, 3}, {5, 8, 5, 8}};
  EXPECT_EQ(union_box(two), (BoundingBox{0, 8, 0, 8}));
  const std::vector<BoundingBox> nested{{2, 5, 2, 5}, {0, 9, 0, 9}};
  EXPECT_EQ(union_box(nested), (BoundingBox{0, 9, 0, 9}));
  EXPECT_THROW(union_box(std::vector<BoundingBox>{}), Error);
}

TEST(UnionBox, ContainsEveryInput) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<BoundingBox> boxes;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) boxes.push_back(testing::random_box(rng, 50, 40));
    const BoundingBox u = union_box(boxes);
    for (const BoundingBox& b : boxes) EXPECT_TRUE(u.contains(b));
  }
}

TEST(RoundToBox, Examples) {
  EXPECT_EQ(round_to_box({2.4, 7.6, 1.0, 9.0}, 20, 20), (BoundingBox{2, 8, 1, 9}));
  const BoundingBox repaired = round_to_box({5.4, 5.6, 3.0, 3.2}, 20, 20);
  EXPECT_EQ(repaired.t, 5);
  EXPECT_EQ(repaired.b, 6);
  EXPECT_EQ(repaired.l, 3);
  EXPECT_EQ(repaired.r, 4);
  const BoundingBox clamped = round_to_box({-3.0, 50.0, 0.0, 5.0}, 20, 20);
  EXPECT_EQ(clamped.t, 0);
  EXPECT_EQ(clamped.b, 19);
  EXPECT_EQ(round_to_box({19.0, 19.0, 19.0, 18.0}, 20, 20), (BoundingBox{18, 19, 18, 19}));
}

TEST(RoundToBox, AlwaysValid) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> any(-100.0, 100.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int w = 2 + static_cast<int>(rng() % 40);
    const int h = 2 + static_cast<int>(rng() % 40);
    const BoxVector v{any(rng), any(rng), any(rng), any(rng)};
    EXPECT_TRUE(is_valid(round_to_box(v, w, h), w, h));
  }
}

}  // namespace
}  // namespace coloc
