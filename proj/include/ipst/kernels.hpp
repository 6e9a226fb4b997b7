// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ipst/tensor.hpp"

/// Forward and backward kernels on plain tensors.
///
/// Every backward kernel adds into the gradient buffers it is given rather
/// than overwriting them. These are the only numeric routines in the engine:
/// both the tape (autodiff.hpp) and the gradient-free inference path call
/// them, so the two paths produce bit-identical values.
namespace ipst::kernels {

/// Stride-1 convolution with `padding` zeros on every spatial edge.
/// `weight` is (out_c, in_c, kh, kw); `bias`, when given, holds out_c values.
Tensor4 conv2d(const Tensor4& input, const Tensor4& weight, const Tensor4* bias,
               std::size_t padding);

/// Any of the gradient outputs may be null to skip that term.
void conv2d_backward(const Tensor4& input, const Tensor4& weight, std::size_t padding,
                     const Tensor4& grad_output, Tensor4* grad_input, Tensor4* grad_weight,
                     Tensor4* grad_bias);

Shape conv2d_output_shape(const Shape& input, const Shape& weight, std::size_t padding);

Tensor4 relu(const Tensor4& input);
void relu_backward(const Tensor4& output, const Tensor4& grad_output, Tensor4& grad_input);

struct PoolResult {
  Tensor4 output;
  /// Flat input index of the selected element, one per output element.
  std::vector<std::uint32_t, memory::CountingAllocator<std::uint32_t>> argmax;
  bool truncated = false;
};

/// 2x2 max pooling, stride 2. Odd trailing rows/columns are dropped.
/// Ties resolve to the first element in row-major window order.
PoolResult maxpool2(const Tensor4& input);
void maxpool2_backward(const PoolResult& pool, const Tensor4& grad_output, Tensor4& grad_input);

/// Bilinear resize with half-pixel centres: src = (dst + 0.5) * in / out - 0.5,
/// clamped at zero below and at the last index above.
Tensor4 bilinear_resize(const Tensor4& input, std::size_t out_h, std::size_t out_w);
void bilinear_resize_backward(const Tensor4& grad_output, Tensor4& grad_input);

/// Gram matrix of a (1, n, h, w) feature map, returned as (1, 1, n, n).
Tensor4 gram(const Tensor4& feature);
void gram_backward(const Tensor4& feature, const Tensor4& grad_output, Tensor4& grad_feature);

Tensor4 add(const Tensor4& a, const Tensor4& b);
Tensor4 sub(const Tensor4& a, const Tensor4& b);
Tensor4 mul_scalar(const Tensor4& a, float s);

/// y = x * scale[c] + shift[c].
Tensor4 channelwise_affine(const Tensor4& input, std::span<const float> scale,
                           std::span<const float> shift);
void channelwise_affine_backward(const Tensor4& grad_output, std::span<const float> scale,
                                 Tensor4& grad_input);
/// y = (a + b) * scale[c] + shift[c], without materializing a + b.
Tensor4 channelwise_affine_sum(const Tensor4& a, const Tensor4& b, std::span<const float> scale,
                               std::span<const float> shift);

/// y = (x - mean[c]) / stddev[c].
Tensor4 channel_standardize(const Tensor4& input, std::span<const float> mean,
                            std::span<const float> stddev);
void channel_standardize_backward(const Tensor4& grad_output, std::span<const float> stddev,
                                  Tensor4& grad_input);

/// Sum of squared elements, accumulated in double.
float sum_of_squares(const Tensor4& input);
void sum_of_squares_backward(const Tensor4& input, float grad_output, Tensor4& grad_input);

/// dst += scale * src.
void accumulate(Tensor4& dst, const Tensor4& src, float scale = 1.0f);

}  // namespace ipst::kernels
