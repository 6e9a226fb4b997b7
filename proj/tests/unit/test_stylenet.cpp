// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "ipst/stylenet.hpp"
#include "support/oracles.hpp"

namespace ipst {
namespace {

std::size_t count_from_shapes(double multiplier) {
  std::size_t total = 0;
  for (const auto& s : stylenet_layer_shapes(multiplier)) total += s.numel();
  return total;
}

TEST(StyleNet, ReferenceNetworkHas9312Parameters) {
  EXPECT_EQ(init_params(0).parameter_count(), 9312u);
  const auto shapes = stylenet_layer_shapes();
  EXPECT_TRUE((shapes[0] == Shape{16, 3, 1, 1}));
  EXPECT_TRUE((shapes[1] == Shape{32, 16, 3, 3}));
  EXPECT_TRUE((shapes[2] == Shape{16, 32, 3, 3}));
  EXPECT_TRUE((shapes[3] == Shape{3, 16, 1, 1}));
}

TEST(StyleNet, AblationWidthsScaleThroughLayerShapes) {
  EXPECT_EQ(init_params(0, 4.0).parameter_count(), count_from_shapes(4.0));
  EXPECT_EQ(init_params(0, 4.0).parameter_count(), 147840u);
  EXPECT_EQ(init_params(0, 0.25).parameter_count(), 600u);
  EXPECT_EQ(init_params(0, 4.0).hidden_width(), 64u);
  EXPECT_EQ(init_params(0, 0.25).hidden_width(), 4u);
  EXPECT_THROW(init_params(0, 0.0), std::invalid_argument);
}

TEST(StyleNet, InitIsDeterministicPerSeed) {
  const auto a = init_params(42), b = init_params(42), c = init_params(43);
  for (std::size_t l = 0; l < kStyleNetLayers; ++l) EXPECT_EQ(max_abs_diff(a.kernels[l], b.kernels[l]), 0.0);
  EXPECT_GT(max_abs_diff(a.kernels[1], c.kernels[1]), 0.0);
}

TEST(StyleNet, ZeroMaskGivesIdentityTransfer) {
  std::mt19937_64 rng(1);
  const Tensor4 image = oracle::random_tensor({1, 3, 60, 80}, rng, 0.0f, 1.0f);
  const Tensor4 out = stylenet_forward(image, zero_mask_params(), {32, true});
  EXPECT_TRUE(out.shape() == image.shape());
  EXPECT_LT(max_abs_diff(out, image), 1e-6);
}

TEST(StyleNet, OutputKeepsInputResolution) {
  const auto params = init_params(3);
  for (const auto& s : {Shape{1, 3, 33, 47}, Shape{1, 3, 500, 301}, Shape{1, 3, 64, 64}}) {
    EXPECT_TRUE(stylenet_forward(Tensor4(s, 0.3f), params).shape() == s) << s.to_string();
  }
}

TEST(StyleNet, WorkingResolutionKeepsAspectRatio) {
  EXPECT_TRUE((sd_shape({1, 3, 1080, 1920}) == Shape{1, 3, 480, 853}));
  EXPECT_TRUE((sd_shape({1, 3, 2160, 3840}) == Shape{1, 3, 480, 853}));
  EXPECT_TRUE((sd_shape({1, 3, 256, 256}) == Shape{1, 3, 256, 256}));
  EXPECT_TRUE((sd_shape({1, 3, 100, 50}, 40) == Shape{1, 3, 40, 20}));
}

TEST(StyleNet, WithoutShortcutOutputIsDenormalizedMask) {
  std::mt19937_64 rng(2);
  const Tensor4 image = oracle::random_tensor({1, 3, 20, 20}, rng, 0.0f, 1.0f);
  const Tensor4 out = stylenet_forward(image, zero_mask_params(), {480, false});
  // A zero mask denormalizes to the per-channel mean.
  EXPECT_FLOAT_EQ(out.at(0, 0, 5, 5), 0.485f);
  EXPECT_FLOAT_EQ(out.at(0, 2, 9, 1), 0.406f);
}

TEST(StyleNet, TapeAndInferencePathsAgreeBitExactly) {
  std::mt19937_64 rng(4);
  const Tensor4 image = oracle::random_tensor({1, 3, 90, 70}, rng, 0.0f, 1.0f);
  const auto params = init_params(9);
  const StyleNetOptions options{48, true};
  ad::Tape tape;
  const ad::Var out = stylenet_forward(tape, tape.constant(image), add_params(tape, params), options);
  EXPECT_EQ(max_abs_diff(tape.value(out), stylenet_forward(image, params, options)), 0.0);
}

TEST(StyleNet, NormalizeRejectsNonRgb) {
  EXPECT_THROW(normalize(Tensor4({1, 4, 8, 8})), std::invalid_argument);
  EXPECT_THROW(denormalize(Tensor4({1, 1, 8, 8})), std::invalid_argument);
}

TEST(StyleNetParams, SerializationRoundTripsBitExactly) {
  for (const double m : {1.0, 4.0, 0.25}) {
    const auto params = init_params(5, m);
    std::ostringstream out(std::ios::binary);
    write_params(params, out);
    std::istringstream in(out.str(), std::ios::binary);
    const auto back = read_params(in);
    ASSERT_EQ(back.hidden_width(), params.hidden_width());
    for (std::size_t l = 0; l < kStyleNetLayers; ++l) {
      EXPECT_EQ(max_abs_diff(back.kernels[l], params.kernels[l]), 0.0);
    }
  }
}

TEST(StyleNetParams, RejectsCorruptFiles) {
  std::ostringstream out(std::ios::binary);
  write_params(init_params(1), out);
  const std::string bytes = out.str();
  for (const std::string& bad : {std::string("IPSTNET0") + bytes.substr(8), bytes.substr(0, bytes.size() - 4),
                                 bytes + std::string(4, '\0'), std::string("IPST")}) {
    std::istringstream in(bad, std::ios::binary);
    EXPECT_THROW(read_params(in), ParamsLoadError);
  }
  std::string nan_bytes = bytes;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan_bytes.data() + 8, &nan, sizeof nan);
  std::istringstream in(nan_bytes, std::ios::binary);
  EXPECT_THROW(read_params(in), ParamsLoadError);
  EXPECT_THROW(load_params("/nonexistent/p.ipstnet"), ParamsLoadError);
}


TEST(StyleNet, NormalizationFormulas) {
  const Tensor4 mean_image = [] {
    Tensor4 t({1, 3, 2, 2});
    const float m[3] = {0.485f, 0.456f, 0.406f};
    for (std::size_t c = 0; c < 3; ++c) for (std::size_t i = 0; i < 4; ++i) t.plane(0, c)[i] = m[c];
    return t;
  }();
  EXPECT_LT(max_abs_diff(normalize(mean_image), Tensor4({1, 3, 2, 2})), 1e-7);
  const Tensor4 white = normalize(Tensor4({1, 3, 1, 1}, 1.0f));
  EXPECT_NEAR(white[0], (1 - 0.485) / 0.229, 1e-6);
  EXPECT_NEAR(white[1], (1 - 0.456) / 0.224, 1e-6);
  EXPECT_NEAR(white[2], (1 - 0.406) / 0.225, 1e-6);
  std::mt19937_64 rng(3);
  const Tensor4 x = oracle::random_tensor({1, 3, 6, 6}, rng, 0.0f, 1.0f);
  EXPECT_LT(max_abs_diff(denormalize(normalize(x)), x), 1e-6);
}

TEST(StyleNet, DownsampleKeepsSdAndConstantImages) {
  const Tensor4 vga({1, 3, 480, 640}, 0.2f);
  EXPECT_EQ(max_abs_diff(downsample_to_sd(vga), vga), 0.0);
  const Tensor4 fhd = downsample_to_sd(Tensor4({1, 3, 1080, 1920}, 0.7f));
  EXPECT_TRUE((fhd.shape() == Shape{1, 3, 480, 853}));
  for (const float v : fhd.data()) ASSERT_FLOAT_EQ(v, 0.7f);
}

TEST(StyleNet, TransformShapesAndZeroParams) {
  const auto params = init_params(1);
  for (const auto& s : {Shape{1, 3, 480, 853}, Shape{1, 3, 480, 480}}) {
    EXPECT_TRUE(transform_f(Tensor4(s, 0.1f), params).shape() == s);
  }
  StyleNetParams zero = params;
  for (auto& k : zero.kernels) k.fill(0.0f);
  std::mt19937_64 rng(2);
  const Tensor4 mask = transform_f(oracle::random_tensor({1, 3, 9, 9}, rng), zero);
  EXPECT_EQ(max_abs_diff(mask, Tensor4(mask.shape())), 0.0);
}

TEST(StyleNet, TransformMatchesComposedNaiveOps) {
  std::mt19937_64 rng(4);
  const Tensor4 x = oracle::random_tensor({1, 3, 4, 4}, rng);
  const auto params = init_params(17);
  Tensor4 want = x;
  for (std::size_t l = 0; l < kStyleNetLayers; ++l) {
    want = oracle::conv2d(want, params.kernels[l], nullptr, kStyleNetPadding[l]);
    if (l + 1 < kStyleNetLayers) for (float& v : want.data()) v = std::max(v, 0.0f);
  }
  EXPECT_LT(oracle::max_relative_error(transform_f(x, params), want), 1e-5);
}

TEST(StyleNet, ForwardMatchesComposedNaiveOps) {
  std::mt19937_64 rng(5);
  const Tensor4 image = oracle::random_tensor({1, 3, 32, 32}, rng, 0.0f, 1.0f);
  const auto params = init_params(18);
  const StyleNetOptions options{16, true};
  // normalize -> resize to 16x16 -> f -> resize back -> + normalized -> denormalize
  const float m[3] = {0.485f, 0.456f, 0.406f}, sd[3] = {0.229f, 0.224f, 0.225f};
  Tensor4 normalized = image;
  for (std::size_t c = 0; c < 3; ++c) for (std::size_t i = 0; i < 32 * 32; ++i) {
    normalized.plane(0, c)[i] = (image.plane(0, c)[i] - m[c]) / sd[c];
  }
  Tensor4 f = oracle::bilinear(normalized, 16, 16);
  for (std::size_t l = 0; l < kStyleNetLayers; ++l) {
    f = oracle::conv2d(f, params.kernels[l], nullptr, kStyleNetPadding[l]);
    if (l + 1 < kStyleNetLayers) for (float& v : f.data()) v = std::max(v, 0.0f);
  }
  Tensor4 want = oracle::bilinear(f, 32, 32);
  for (std::size_t c = 0; c < 3; ++c) for (std::size_t i = 0; i < 32 * 32; ++i) {
    want.plane(0, c)[i] = (want.plane(0, c)[i] + normalized.plane(0, c)[i]) * sd[c] + m[c];
  }
  EXPECT_LT(oracle::max_relative_error(stylenet_forward(image, params, options), want), 1e-5);
}

}  // namespace
}  // namespace ipst
