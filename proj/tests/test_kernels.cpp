#include <gtest/gtest.h>

#include "clipmot/clip_transformer.hpp"
#include "clipmot/kernels.hpp"
#include "test_util.hpp"

using namespace clipmot;

namespace {
std::vector<Embedding> random_set(Rng& r, int n, int dim) {
  std::vector<Embedding> v;
  for (int i = 0; i < n; ++i) v.push_back(tu::random_vector(r, dim));
  return v;
}
}  // namespace

TEST(Kernels, DotMatrixSerialEqualsParallel) {
  Rng r(1);
  const auto a = random_set(r, 90, 16), b = random_set(r, 70, 16);
  const Matrix s = kernels::dot_matrix_serial(a, b);
  const Matrix p = kernels::dot_matrix_parallel(a, b);
  EXPECT_TRUE((s.array() == p.array()).all());
  EXPECT_NEAR(s(3, 5), a[3].dot(b[5]), 1e-12);
}

TEST(Kernels, CosineDistanceSerialEqualsParallel) {
  Rng r(2);
  const auto a = random_set(r, 80, 8), b = random_set(r, 80, 8);
  const Matrix s = kernels::cosine_distance_matrix_serial(a, b);
  const Matrix p = kernels::cosine_distance_matrix_parallel(a, b);
  EXPECT_TRUE((s.array() == p.array()).all());
  EXPECT_NEAR(s(1, 2), 1.0 - cosine_similarity(a[1], b[2]), 1e-12);
}

TEST(Kernels, SummarizeBatchSerialEqualsParallel) {
  Rng r(3);
  const auto w = SummarizerWeights::random(ModelDims{6, 16, 2, 4, 32}, 9);
  std::vector<std::vector<Embedding>> tracks;
  for (int i = 0; i < 12; ++i) tracks.push_back(random_set(r, 1 + static_cast<int>(r.below(8)), 6));
  const auto s = kernels::summarize_batch_serial(w, tracks);
  const auto p = kernels::summarize_batch_parallel(w, tracks);
  ASSERT_EQ(s.size(), p.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_TRUE((s[i].array() == p[i].array()).all());
}

TEST(Kernels, GradientSerialMatchesParallel) {
  Rng r(4);
  const auto w = SummarizerWeights::random(ModelDims{4, 8, 2, 2, 16}, 5);
  std::vector<TrainSample> batch;
  for (int i = 0; i < 8; ++i) {
    TrainSample s;
    s.identity = i / 2;
    s.elements = random_set(r, 1 + static_cast<int>(r.below(4)), 4);
    s.tags.assign(s.elements.size(), ElementTag::positive);
    batch.push_back(s);
  }
  const auto s = kernels::gradient_serial(w, batch);
  const auto d1 = kernels::gradient_parallel(w, batch, true);
  const auto d2 = kernels::gradient_parallel(w, batch, true);
  const auto nd = kernels::gradient_parallel(w, batch, false);
  EXPECT_EQ(d1.grad, d2.grad);
  EXPECT_EQ(d1.loss, d2.loss);
  EXPECT_DOUBLE_EQ(s.loss, d1.loss);
  for (std::size_t k = 0; k < s.grad.size(); ++k) {
    EXPECT_NEAR(s.grad[k], d1.grad[k], 1e-12 * std::max(1.0, std::abs(s.grad[k])));
    EXPECT_NEAR(s.grad[k], nd.grad[k], 1e-12 * std::max(1.0, std::abs(s.grad[k])));
  }
}
