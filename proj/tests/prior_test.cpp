#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "coloc/prior.hpp"
#include "test_support.hpp"

namespace coloc {
namespace {

using testing::box_map;

// Direct summation over the Otsu split.
double contrast_oracle(const GrayMap& map) {
  const double t = otsu_threshold(map);
  double fs = 0, bs = 0, fn = 0, bn = 0;
  for (double v : map.values()) {
    if (v > t) {
      fs += v;
      fn += 1;
    } else {
      bs += v;
      bn += 1;
    }
  }
  return fs / fn - bs / bn;
}

TEST(QualityScore, PerfectBinaryMap) {
  const GrayMap map = box_map(10, 10, {2, 5, 2, 5});
  EXPECT_DOUBLE_EQ(contrast_oracle(map), 1.0);
  EXPECT_DOUBLE_EQ(quality_score(map), 1.0);
}

TEST(QualityScore, MeanContrast) {
  const GrayMap map = box_map(10, 10, {2, 5, 2, 5}, 0.8, 0.3);
  EXPECT_NEAR(contrast_oracle(map), 0.5, 1e-12);
  EXPECT_NEAR(quality_score(map), 0.5, 1e-12);
}

TEST(QualityScore, FloorApplies) {
  const GrayMap map = box_map(10, 10, {2, 5, 2, 5}, 0.32, 0.3);
  EXPECT_LE(contrast_oracle(map), kMinQuality);
  EXPECT_DOUBLE_EQ(quality_score(map), kMinQuality);
  EXPECT_THROW(quality_score(GrayMap::filled(4, 4, 0.2)), Error);
}

// Pixel 0 has S = 0.2 below phi(S) and C = 0.8 above phi(C).
struct PriorFixture {
  GrayMap s = GrayMap(4, 2, {0.2, 0.2, 0.2, 0.2, 0.9, 0.9, 0.9, 0.9});
  GrayMap c = GrayMap(4, 2, {0.8, 0.1, 0.8, 0.1, 0.8, 0.1, 0.8, 0.1});
};

TEST(AbsolutePrior, ElseBranchCopiesSaliency) {
  PriorFixture f;
  ASSERT_GE(0.9, otsu_threshold(f.s));
  const GrayMap a = absolute_prior(f.s, f.c, {1.0, 1.0});
  EXPECT_EQ(a[4], 0.9);
  EXPECT_EQ(a[5], 0.9);
  EXPECT_EQ(a[1], 0.2);  // C below its threshold
}

TEST(AbsolutePrior, HandEvaluatedWeightedBranch) {
  PriorFixture f;
  ASSERT_LT(0.2, otsu_threshold(f.s));
  ASSERT_GT(0.8, otsu_threshold(f.c));
  EXPECT_NEAR(absolute_prior(f.s, f.c, {0.5, 0.5})[0], 0.5, 1e-9);
  EXPECT_NEAR(absolute_prior(f.s, f.c, {0.25, 0.75})[0], 0.65, 1e-9);
}

TEST(AbsolutePrior, DimensionMismatch) {
  try {
    absolute_prior(GrayMap::filled(3, 3, 0.0), GrayMap::filled(4, 3, 0.0), {1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(AbsolutePrior, PropertiesOnRandomMaps) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> q(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const GrayMap s = testing::random_map(rng, 16, 12);
    const GrayMap c = testing::random_map(rng, 16, 12);
    const QualityScores scores{q(rng), q(rng)};
    const GrayMap a = absolute_prior(s, c, scores);
    const double phi_s = otsu_threshold(s), phi_c = otsu_threshold(c);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_GE(a[i], 0.0);
      EXPECT_LE(a[i], 1.0);
      if (!(s[i] < phi_s && c[i] > phi_c)) {
        EXPECT_EQ(a[i], s[i]);
      }
    }
    for (double lambda : {0.1, 3.0, 100.0, 0.37}) {
      const GrayMap scaled =
          absolute_prior(s, c, {scores.saliency * lambda, scores.cosaliency * lambda});
      EXPECT_EQ(scaled, a) << "lambda " << lambda;
    }
  }
}

TEST(AnchoredBox, SingleBlobInsideMediator) {
  const GrayMap a = box_map(30, 30, {10, 15, 12, 18});
  EXPECT_EQ(anchored_box(a, {5, 25, 5, 25}), (BoundingBox{10, 15, 12, 18}));
}

TEST(AnchoredBox, DistantBlobExcluded) {
  const BoundingBox near{8, 14, 8, 16};
  const BoundingBox far{22, 27, 22, 27};
  const GrayMap a = testing::paint(box_map(30, 30, near), far);
  // Mediator clips the near blob; the far blob never touches it.
  const BoundingBox mediator{10, 12, 10, 20};
  const BoundingBox got = anchored_box(a, mediator);
  EXPECT_EQ(got, near);  // whole region, not clipped
  EXPECT_GT(intersection_area(got, mediator), 0);
}

TEST(AnchoredBox, NoOverlapReturnsMediator) {
  const GrayMap a = box_map(30, 30, {20, 25, 20, 25});
  const BoundingBox mediator{2, 8, 2, 8};
  EXPECT_EQ(anchored_box(a, mediator), mediator);
}

TEST(AnchoredBox, DegeneratePriorThrows) {
  EXPECT_THROW(anchored_box(GrayMap::filled(8, 8, 0.3), {1, 4, 1, 4}), Error);
}

TEST(AnchoredBox, RandomProperties) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    GrayMap a = GrayMap::filled(40, 40, 0.1);
    const int blobs = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < blobs; ++k) {
      BoundingBox b = testing::random_box(rng, 40, 40);
      b.b = std::min(b.b, b.t + 8);
      b.r = std::min(b.r, b.l + 8);
      a = testing::paint(a, b, 0.9);
    }
    const BoundingBox mediator = testing::random_box(rng, 40, 40);
    const BoundingBox got = anchored_box(a, mediator);
    EXPECT_TRUE(got == mediator || intersection_area(got, mediator) > 0);

    // Regions entirely inside the mediator keep the anchor inside it.
    const auto comps = connected_components(binarize(a, otsu_threshold(a)));
    bool all_inside = true;
    for (const auto& comp : comps) {
      for (std::size_t idx : comp) {
        all_inside &= mediator.contains_pixel(static_cast<int>(idx / 40), static_cast<int>(idx % 40));
      }
    }
    if (all_inside) {
      EXPECT_TRUE(mediator.contains(got));
    }
  }
}

}  // namespace
}  // namespace coloc
