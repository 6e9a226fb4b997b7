// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include <gtest/gtest.h>
#include <numeric>

#include <random>

#include "ipst/metrics.hpp"
#include "ipst/synthetic.hpp"
#include "support/oracles.hpp"
#include "support/shared.hpp"

namespace ipst {
namespace {

using testing_support::fixture_vgg;

TEST(Metrics, F1MatchesPublishedRow) {
  EXPECT_NEAR(f1_score(0.7484, 0.8568), 0.7989, 5e-4);
  EXPECT_DOUBLE_EQ(f1_score(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(Metrics, StyleSimilarityOfImageWithItselfIsOne) {
  const Tensor4 image = make_test_scene(48, 64, 3);
  EXPECT_DOUBLE_EQ(style_similarity(image, image, fixture_vgg()), 1.0);
}

TEST(Metrics, StyleSimilarityIsMonotoneInLoss) {
  EXPECT_DOUBLE_EQ(style_similarity_from_loss(0.0), 1.0);
  EXPECT_GT(style_similarity_from_loss(10.0), style_similarity_from_loss(1000.0));
  EXPECT_DOUBLE_EQ(style_similarity_from_loss(1500.0), 0.5);
  EXPECT_DOUBLE_EQ(style_similarity_from_loss(3000.0), 0.0);
  EXPECT_DOUBLE_EQ(style_similarity_from_loss(1e12), 0.0);
  const Tensor4 a = make_test_scene(48, 48, 3);
  const Tensor4 b = make_test_scene(48, 48, 4);
  EXPECT_LT(style_similarity(a, b, fixture_vgg()), 1.0);
}

TEST(Metrics, ContentProxyOfImageWithItselfIsOne) {
  const Tensor4 image = make_test_scene(50, 70, 5);
  EXPECT_DOUBLE_EQ(content_similarity_proxy(image, image), 1.0);
}

TEST(Metrics, ContentProxyIsInUnitRangeAndPrefersSimilarEdges) {
  const Tensor4 a = make_test_scene(64, 64, 1);
  std::mt19937_64 rng(2);
  Tensor4 noisy = a;
  std::normal_distribution<float> noise(0.0f, 0.02f);
  for (float& v : noisy.data()) v += noise(rng);
  const Tensor4 other = make_test_scene(64, 64, 9);
  const double near = content_similarity_proxy(a, noisy);
  const double far = content_similarity_proxy(a, other);
  EXPECT_GT(near, far);
  for (const double s : {near, far}) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Metrics, ContentProxyFlatImageRules) {
  const Tensor4 flat({1, 3, 32, 32}, 0.4f);
  const Tensor4 flat2({1, 3, 32, 32}, 0.7f);
  const Tensor4 busy = make_test_scene(32, 32, 1);
  EXPECT_DOUBLE_EQ(content_similarity_proxy(flat, flat), 1.0);
  EXPECT_DOUBLE_EQ(content_similarity_proxy(flat, flat2), 0.5);
  EXPECT_DOUBLE_EQ(content_similarity_proxy(flat, busy), 0.5);
}

TEST(Metrics, ContentProxyRejectsMismatchedShapes) {
  EXPECT_THROW(content_similarity_proxy(Tensor4({1, 3, 32, 32}), Tensor4({1, 3, 32, 33})), std::invalid_argument);
}

TEST(Metrics, ScoreCombinesComponents) {
  const Tensor4 c = make_test_scene(40, 40, 1);
  const Tensor4 s = make_test_scene(40, 40, 2);
  const ScoreReport r = score(c, s, s, fixture_vgg());
  EXPECT_DOUBLE_EQ(r.style_sim, 1.0);
  EXPECT_DOUBLE_EQ(r.f1, f1_score(r.content_sim, r.style_sim));
  EXPECT_DOUBLE_EQ(score(c, s, c, fixture_vgg()).content_sim, 1.0);
}


TEST(Metrics, ContentProxyToleratesColorShiftNotScrambling) {
  const Tensor4 a = make_test_scene(96, 96, 6);
  Tensor4 shifted = a;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 96 * 96; ++i) shifted.plane(0, c)[i] += 0.1f * static_cast<float>(c + 1);
  }
  EXPECT_GT(content_similarity_proxy(a, shifted), 0.95);

  // Random pixel permutation destroys the spatial structure.
  std::vector<std::size_t> order(96 * 96);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 rng(1);
  std::shuffle(order.begin(), order.end(), rng);
  Tensor4 scrambled = a;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < order.size(); ++i) scrambled.plane(0, c)[i] = a.plane(0, c)[order[i]];
  }
  EXPECT_NEAR(content_similarity_proxy(a, scrambled), 0.5, 0.05);
}

TEST(Metrics, F1EdgeCases) {
  EXPECT_DOUBLE_EQ(f1_score(0.3, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(f1_score(0.0, 0.8), 0.0);
}

}  // namespace
}  // namespace ipst
