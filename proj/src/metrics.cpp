// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ipst {
namespace {

std::vector<double> sobel_magnitude(const Tensor4& image) {
  const Shape& s = image.shape();
  const std::size_t h = s.h;
  const std::size_t w = s.w;
  std::vector<double> luma(h * w);
  const float* r = image.plane(0, 0);
  const float* g = image.plane(0, 1);
  const float* b = image.plane(0, 2);
  for (std::size_t i = 0; i < h * w; ++i) luma[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];

  auto at = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
    y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(h) - 1);
    x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(w) - 1);
    return luma[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  };
  std::vector<double> mag(h * w);
  for (std::size_t yy = 0; yy < h; ++yy) {
    for (std::size_t xx = 0; xx < w; ++xx) {
      const auto y = static_cast<std::ptrdiff_t>(yy);
      const auto x = static_cast<std::ptrdiff_t>(xx);
      const double gx = (at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2 * at(y, x - 1) + at(y + 1, x - 1));
      const double gy = (at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2 * at(y - 1, x) + at(y - 1, x + 1));
      mag[yy * w + xx] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return mag;
}

// Returns false for a (numerically) flat map.
bool standardize(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  if (var < 1e-18) return false;
  const double inv = 1.0 / std::sqrt(var);
  for (double& x : v) x = (x - mean) * inv;
  return true;
}

}  // namespace

double style_similarity_from_loss(double style_loss) {
  return std::max(0.0, kStyleLossScale - style_loss) / kStyleLossScale;
}

double style_similarity(const Tensor4& output, const Tensor4& style, const VggWeights& weights,
                        std::size_t sd_height) {
  const FeatureSet o = extract_features(downsample_to_sd(output, sd_height), weights);
  const FeatureSet s = extract_features(downsample_to_sd(style, sd_height), weights);
  return style_similarity_from_loss(style_loss(o, s));
}

double content_similarity_proxy(const Tensor4& content, const Tensor4& output) {
  require_same_shape(content.shape(), output.shape(), "content_similarity_proxy");
  if (content.shape().n != 1 || content.shape().c != 3) {
    throw std::invalid_argument("content_similarity_proxy: expected (1,3,h,w) images");
  }
  std::vector<double> a = sobel_magnitude(content);
  std::vector<double> b = sobel_magnitude(output);
  const bool ta = standardize(a);
  const bool tb = standardize(b);
  if (!ta && !tb) return max_abs_diff(content, output) == 0.0f ? 1.0 : 0.5;
  if (!ta || !tb) return 0.5;
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  r /= static_cast<double>(a.size());
  return std::clamp((r + 1.0) / 2.0, 0.0, 1.0);
}

double f1_score(double content_sim, double style_sim) {
  const double sum = content_sim + style_sim;
  return sum > 0.0 ? 2.0 * content_sim * style_sim / sum : 0.0;
}

ScoreReport score(const Tensor4& content, const Tensor4& style, const Tensor4& output,
                  const VggWeights& weights, std::size_t sd_height) {
  ScoreReport report;
  report.content_sim = content_similarity_proxy(content, output);
  report.style_sim = style_similarity(output, style, weights, sd_height);
  report.f1 = f1_score(report.content_sim, report.style_sim);
  return report;
}

}  // namespace ipst
