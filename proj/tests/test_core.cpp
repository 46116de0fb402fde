#include <gtest/gtest.h>

#include <cmath>

#include "clipmot/core.hpp"
#include "test_util.hpp"

using namespace clipmot;

TEST(BoundingBox, RejectsNonPositiveSize) {
  EXPECT_THROW(BoundingBox::make(0, 0, 0, 1), std::invalid_argument);
  EXPECT_THROW(BoundingBox::make(0, 0, 1, -1), std::invalid_argument);
  EXPECT_THROW(BoundingBox::make(NAN, 0, 1, 1), std::invalid_argument);
  EXPECT_NO_THROW(BoundingBox::make(-5, -5, 1, 1));
}

TEST(Iou, HalfShiftedUnitBoxes) {
  // Intersection 0.5, union 1.5.
  const auto a = BoundingBox::make(0, 0, 1, 1);
  const auto b = BoundingBox::make(0.5, 0, 1, 1);
  EXPECT_NEAR(iou(a, b), 1.0 / 3.0, 1e-15);
}

TEST(Iou, IdenticalDisjointAndTouching) {
  const auto a = BoundingBox::make(10, 20, 30, 40);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, BoundingBox::make(100, 100, 5, 5)), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, BoundingBox::make(40, 20, 5, 5)), 0.0);
}

TEST(Iou, SymmetricAndBounded) {
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = BoundingBox::make(r.uniform(0, 50), r.uniform(0, 50), r.uniform(1, 40), r.uniform(1, 40));
    const auto b = BoundingBox::make(r.uniform(0, 50), r.uniform(0, 50), r.uniform(1, 40), r.uniform(1, 40));
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
  }
}

TEST(Cosine, FortyFiveDegrees) {
  Embedding a(2), b(2);
  a << 1, 0;
  b << 1, 1;
  EXPECT_NEAR(cosine_similarity(a, b), 0.70710678, 1e-8);
}

TEST(Cosine, ErrorsOnZeroNormAndMismatch) {
  Embedding z = Embedding::Zero(3), a = Embedding::Ones(3), b = Embedding::Ones(4);
  EXPECT_THROW(cosine_similarity(z, a), std::invalid_argument);
  EXPECT_THROW(cosine_similarity(a, b), std::invalid_argument);
}

TEST(Normalize, UnitNorm) {
  Embedding v(3);
  v << 3, 4, 12;
  EXPECT_NEAR(l2_normalized(v).norm(), 1.0, 1e-15);
  EXPECT_THROW(l2_normalized(Embedding::Zero(3)), std::invalid_argument);
}

TEST(Bisoftmax, TwoByTwoOrthonormal) {
  // Logits 1/t on the diagonal, 0 elsewhere; with t = 1 both softmaxes give
  // e / (e + 1) on the diagonal.
  std::vector<Embedding> q{tu::unit(2, 0), tu::unit(2, 1)};
  const Matrix a = bisoftmax_affinity(q, q, 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(a(0, 0), e / (e + 1.0), 1e-12);
  EXPECT_NEAR(a(1, 1), e / (e + 1.0), 1e-12);
  EXPECT_NEAR(a(0, 1), 1.0 / (e + 1.0), 1e-12);
}

TEST(Bisoftmax, EntriesInUnitIntervalAndStable) {
  Rng r(4);
  std::vector<Embedding> q, k;
  for (int i = 0; i < 5; ++i) q.push_back(l2_normalized(tu::random_vector(r, 8)));
  for (int i = 0; i < 7; ++i) k.push_back(l2_normalized(tu::random_vector(r, 8)));
  const Matrix a = bisoftmax_affinity(q, k, 0.01);
  EXPECT_TRUE(a.allFinite());
  EXPECT_GE(a.minCoeff(), 0.0);
  EXPECT_LE(a.maxCoeff(), 1.0);
}

TEST(Bisoftmax, RejectsBadInput) {
  std::vector<Embedding> q{tu::unit(2, 0)};
  EXPECT_THROW(bisoftmax_affinity(q, {}, 1.0), std::invalid_argument);
  EXPECT_THROW(bisoftmax_affinity(q, q, 0.0), std::invalid_argument);
}

TEST(Tracklet, AtFrameLookup) {
  Tracklet t;
  t.entries = {tu::make_det(2, 0, tu::unit(2, 0)), tu::make_det(4, 1, tu::unit(2, 0))};
  ASSERT_NE(t.at_frame(4), nullptr);
  EXPECT_EQ(t.at_frame(4)->source_index, 1);
  EXPECT_EQ(t.at_frame(3), nullptr);
  EXPECT_EQ(t.first_frame(), 2);
  EXPECT_EQ(t.last_frame(), 4);
}
