// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include "ipst/stylenet.hpp"
#include "ipst/tensor.hpp"
#include "ipst/vgg.hpp"

namespace ipst {

inline constexpr double kStyleLossScale = 3000.0;

struct ScoreReport {
  /// Sobel-correlation proxy; not comparable with edge-model content scores.
  double content_sim = 0.0;
  double style_sim = 0.0;
  double f1 = 0.0;
};

/// max(0, 3000 - loss) / 3000.
double style_similarity_from_loss(double style_loss);

/// Style loss between output and style at loss resolution, mapped to [0,1].
double style_similarity(const Tensor4& output, const Tensor4& style, const VggWeights& weights,
                        std::size_t sd_height = kDefaultSdHeight);

/// Structural agreement of two same-size RGB images: Pearson correlation of
/// their standardized luma Sobel-magnitude maps, mapped to [0,1] by (r+1)/2.
/// Symmetric. Two flat images score 1 if equal and 0.5 otherwise; a flat
/// image against a textured one scores 0.5.
double content_similarity_proxy(const Tensor4& content, const Tensor4& output);

/// Harmonic mean; 0 when both inputs are 0.
double f1_score(double content_sim, double style_sim);

ScoreReport score(const Tensor4& content, const Tensor4& style, const Tensor4& output,
                  const VggWeights& weights, std::size_t sd_height = kDefaultSdHeight);

}  // namespace ipst
