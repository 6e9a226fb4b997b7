// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "ipst/autodiff.hpp"
#include "ipst/tensor.hpp"

namespace ipst {

inline constexpr std::size_t kStyleNetLayers = 4;
inline constexpr std::array<std::size_t, kStyleNetLayers> kStyleNetPadding{0, 1, 1, 0};
inline constexpr std::size_t kDefaultSdHeight = 480;

/// Kernel shapes of the colour transform for a channel multiplier
/// (1.0 is the reference network; 4.0 and 0.25 are the ablation variants).
std::array<Shape, kStyleNetLayers> stylenet_layer_shapes(double channel_multiplier = 1.0);

/// The four bias-free convolution kernels of the colour transform f.
struct StyleNetParams {
  std::array<Tensor4, kStyleNetLayers> kernels;

  std::size_t parameter_count() const;
  /// Output channels of the first layer (16 for the reference network).
  std::size_t hidden_width() const { return kernels[0].shape().n; }
};

struct StyleNetOptions {
  std::size_t sd_height = kDefaultSdHeight;
  /// Adds the normalized content back onto the upsampled mask.
  bool shortcut = true;
};

using ParamVars = std::array<ad::Var, kStyleNetLayers>;

/// Layers 1-3 Kaiming-uniform, layer 4 Kaiming-uniform scaled by 0.1.
StyleNetParams init_params(std::uint64_t seed, double channel_multiplier = 1.0);
/// init_params with the last layer zeroed: the mask is identically zero.
StyleNetParams zero_mask_params(double channel_multiplier = 1.0);

ParamVars add_params(ad::Tape& tape, const StyleNetParams& params, bool requires_grad = true);

/// (x - M) / Sigma per RGB channel. Throws on non-3-channel input.
ad::Var normalize(ad::Tape& tape, ad::Var image);
Tensor4 normalize(const Tensor4& image);
/// x * Sigma + M; no clamping.
ad::Var denormalize(ad::Tape& tape, ad::Var image);
Tensor4 denormalize(const Tensor4& image);

/// Height fixed to sd_height, width round(sd_height * w / h); inputs no taller
/// than sd_height keep their shape.
Shape sd_shape(const Shape& input, std::size_t sd_height = kDefaultSdHeight);
ad::Var downsample_to_sd(ad::Tape& tape, ad::Var image, std::size_t sd_height = kDefaultSdHeight);
Tensor4 downsample_to_sd(const Tensor4& image, std::size_t sd_height = kDefaultSdHeight);

/// conv1x1 -> relu -> conv3x3 -> relu -> conv3x3 -> relu -> conv1x1.
ad::Var transform_f(ad::Tape& tape, ad::Var x, const ParamVars& params);
Tensor4 transform_f(const Tensor4& x, const StyleNetParams& params);

/// O = D(C' + up(f(down(C')))), C' = N(C). Output has the input's size.
ad::Var stylenet_forward(ad::Tape& tape, ad::Var content, const ParamVars& params,
                         const StyleNetOptions& options = {});
/// Gradient-free inference; bit-identical to the tape path. Safe to call
/// concurrently with shared params.
Tensor4 stylenet_forward(const Tensor4& content, const StyleNetParams& params,
                         const StyleNetOptions& options = {});

class ParamsLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// IPSTNET1: magic then the four kernels as raw little-endian f32. The
/// hidden width is recovered from the payload size.
void write_params(const StyleNetParams& params, std::ostream& out);
StyleNetParams read_params(std::istream& in);
void save_params(const StyleNetParams& params, const std::filesystem::path& path);
StyleNetParams load_params(const std::filesystem::path& path);

}  // namespace ipst
