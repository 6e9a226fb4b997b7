// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <spdlog/spdlog.h>

namespace ipst::kernels {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

using Scratch = std::vector<float, memory::CountingAllocator<float>>;

// Columns per im2col strip; keeps the scratch matrix around a few MB.
constexpr std::size_t kStripColumns = 4096;

struct ConvGeometry {
  std::size_t in_c, in_h, in_w;
  std::size_t out_c, out_h, out_w;
  std::size_t kh, kw, pad;

  std::size_t patch() const { return in_c * kh * kw; }
  bool pointwise() const { return kh == 1 && kw == 1 && pad == 0; }
  std::size_t rows_per_strip() const { return std::max<std::size_t>(1, kStripColumns / out_w); }
};

ConvGeometry make_geometry(const Shape& in, const Shape& wt, std::size_t pad) {
  const Shape out = conv2d_output_shape(in, wt, pad);
  return {in.c, in.h, in.w, out.c, out.h, out.w, wt.h, wt.w, pad};
}

// Copies the receptive fields of output rows [oy0, oy1) into a
// (patch x npix) row-major matrix.
void im2col_strip(const float* image, const ConvGeometry& g, std::size_t oy0, std::size_t oy1,
                  float* col) {
  const std::size_t npix = (oy1 - oy0) * g.out_w;
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  const auto out_w = static_cast<std::ptrdiff_t>(g.out_w);
  for (std::size_t c = 0; c < g.in_c; ++c) {
    const float* src_plane = image + c * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        float* dst = col + ((c * g.kh + ky) * g.kw + kx) * npix;
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kx) - pad;
        const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(-shift, 0, out_w);
        const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(in_w - shift, lo, out_w);
        for (std::size_t oy = oy0; oy < oy1; ++oy, dst += g.out_w) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - pad;
          if (iy < 0 || iy >= in_h) {
            std::fill(dst, dst + g.out_w, 0.0f);
            continue;
          }
          const float* src = src_plane + iy * in_w + shift;
          std::fill(dst, dst + lo, 0.0f);
          std::copy(src + lo, src + hi, dst + lo);
          std::fill(dst + hi, dst + out_w, 0.0f);
        }
      }
    }
  }
}

// Transpose of im2col_strip: scatters column gradients back onto the image.
void col2im_strip(const float* col, const ConvGeometry& g, std::size_t oy0, std::size_t oy1,
                  float* image) {
  const std::size_t npix = (oy1 - oy0) * g.out_w;
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  const auto out_w = static_cast<std::ptrdiff_t>(g.out_w);
  for (std::size_t c = 0; c < g.in_c; ++c) {
    float* dst_plane = image + c * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const float* src = col + ((c * g.kh + ky) * g.kw + kx) * npix;
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kx) - pad;
        const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(-shift, 0, out_w);
        const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(in_w - shift, lo, out_w);
        for (std::size_t oy = oy0; oy < oy1; ++oy, src += g.out_w) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - pad;
          if (iy < 0 || iy >= in_h) continue;
          float* dst = dst_plane + iy * in_w + shift;
          for (std::ptrdiff_t ox = lo; ox < hi; ++ox) dst[ox] += src[ox];
        }
      }
    }
  }
}

struct AxisSample {
  std::size_t i0, i1;
  float w0, w1;
};

std::vector<AxisSample> axis_samples(std::size_t in, std::size_t out) {
  std::vector<AxisSample> samples(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t d = 0; d < out; ++d) {
    double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
    src = std::max(src, 0.0);
    auto i0 = static_cast<std::size_t>(src);
    i0 = std::min(i0, in - 1);
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    const auto w1 = static_cast<float>(src - static_cast<double>(i0));
    samples[d] = {i0, i1, 1.0f - w1, w1};
  }
  return samples;
}

void require_channels(const Shape& s, std::size_t count, const char* what) {
  if (s.c != count) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(count) +
                                " per-channel values for input " + s.to_string());
  }
}

}  // namespace

Shape conv2d_output_shape(const Shape& input, const Shape& weight, std::size_t padding) {
  if (weight.c != input.c) {
    throw std::invalid_argument("conv2d: input " + input.to_string() +
                                " does not match weight " + weight.to_string());
  }
  if (input.h + 2 * padding < weight.h || input.w + 2 * padding < weight.w) {
    throw std::invalid_argument("conv2d: kernel " + weight.to_string() +
                                " larger than padded input " + input.to_string());
  }
  return {input.n, weight.n, input.h + 2 * padding - weight.h + 1,
          input.w + 2 * padding - weight.w + 1};
}

Tensor4 conv2d(const Tensor4& input, const Tensor4& weight, const Tensor4* bias,
               std::size_t padding) {
  const ConvGeometry g = make_geometry(input.shape(), weight.shape(), padding);
  if (bias != nullptr && bias->numel() != g.out_c) {
    throw std::invalid_argument("conv2d: bias " + bias->shape().to_string() +
                                " does not match weight " + weight.shape().to_string());
  }
  Tensor4 out({input.shape().n, g.out_c, g.out_h, g.out_w});
  const auto out_plane = static_cast<Eigen::Index>(g.out_h * g.out_w);
  const ConstMatMap w(weight.ptr(), static_cast<Eigen::Index>(g.out_c),
                      static_cast<Eigen::Index>(g.patch()));

  Scratch col;
  for (std::size_t b = 0; b < input.shape().n; ++b) {
    const float* x = input.plane(b, 0);
    float* y = out.plane(b, 0);
    if (g.pointwise()) {
      const ConstMatMap xm(x, static_cast<Eigen::Index>(g.in_c), out_plane);
      MatMap ym(y, static_cast<Eigen::Index>(g.out_c), out_plane);
      ym.noalias() = w * xm;
    } else {
      const std::size_t rows = g.rows_per_strip();
      col.resize(g.patch() * std::min(rows, g.out_h) * g.out_w);
      for (std::size_t oy0 = 0; oy0 < g.out_h; oy0 += rows) {
        const std::size_t oy1 = std::min(g.out_h, oy0 + rows);
        const auto npix = static_cast<Eigen::Index>((oy1 - oy0) * g.out_w);
        im2col_strip(x, g, oy0, oy1, col.data());
        const ConstMatMap cm(col.data(), static_cast<Eigen::Index>(g.patch()), npix);
        StridedMap ym(y + oy0 * g.out_w, static_cast<Eigen::Index>(g.out_c), npix,
                      Eigen::OuterStride<>(out_plane));
        ym.noalias() = w * cm;
      }
    }
    if (bias != nullptr) {
      for (std::size_t oc = 0; oc < g.out_c; ++oc) {
        float* p = out.plane(b, oc);
        const float bv = (*bias)[oc];
        for (Eigen::Index i = 0; i < out_plane; ++i) p[i] += bv;
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor4& input, const Tensor4& weight, std::size_t padding,
                     const Tensor4& grad_output, Tensor4* grad_input, Tensor4* grad_weight,
                     Tensor4* grad_bias) {
  const ConvGeometry g = make_geometry(input.shape(), weight.shape(), padding);
  require_same_shape(grad_output.shape(), {input.shape().n, g.out_c, g.out_h, g.out_w},
                     "conv2d_backward grad_output");
  if (grad_input != nullptr) require_same_shape(grad_input->shape(), input.shape(), "conv2d_backward grad_input");
  if (grad_weight != nullptr) require_same_shape(grad_weight->shape(), weight.shape(), "conv2d_backward grad_weight");

  const auto out_plane = static_cast<Eigen::Index>(g.out_h * g.out_w);
  const auto oc = static_cast<Eigen::Index>(g.out_c);
  const auto patch = static_cast<Eigen::Index>(g.patch());
  const ConstMatMap w(weight.ptr(), oc, patch);
  Scratch col;
  Scratch dcol;

  for (std::size_t b = 0; b < input.shape().n; ++b) {
    const float* x = input.plane(b, 0);
    const float* dy = grad_output.plane(b, 0);
    if (grad_bias != nullptr) {
      for (std::size_t c = 0; c < g.out_c; ++c) {
        const float* p = grad_output.plane(b, c);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < out_plane; ++i) sum += p[i];
        (*grad_bias)[c] += static_cast<float>(sum);
      }
    }
    if (g.pointwise()) {
      const ConstMatMap dym(dy, oc, out_plane);
      if (grad_input != nullptr) {
        MatMap dxm(grad_input->plane(b, 0), static_cast<Eigen::Index>(g.in_c), out_plane);
        dxm.noalias() += w.transpose() * dym;
      }
      if (grad_weight != nullptr) {
        const ConstMatMap xm(x, static_cast<Eigen::Index>(g.in_c), out_plane);
        MatMap dwm(grad_weight->ptr(), oc, patch);
        dwm.noalias() += dym * xm.transpose();
      }
      continue;
    }
    const std::size_t rows = g.rows_per_strip();
    const std::size_t max_cols = std::min(rows, g.out_h) * g.out_w;
    if (grad_weight != nullptr) col.resize(g.patch() * max_cols);
    if (grad_input != nullptr) dcol.resize(g.patch() * max_cols);
    for (std::size_t oy0 = 0; oy0 < g.out_h; oy0 += rows) {
      const std::size_t oy1 = std::min(g.out_h, oy0 + rows);
      const auto npix = static_cast<Eigen::Index>((oy1 - oy0) * g.out_w);
      const ConstStridedMap dym(dy + oy0 * g.out_w, oc, npix, Eigen::OuterStride<>(out_plane));
      if (grad_weight != nullptr) {
        im2col_strip(x, g, oy0, oy1, col.data());
        const ConstMatMap cm(col.data(), patch, npix);
        MatMap dwm(grad_weight->ptr(), oc, patch);
        dwm.noalias() += dym * cm.transpose();
      }
      if (grad_input != nullptr) {
        MatMap dcm(dcol.data(), patch, npix);
        dcm.noalias() = w.transpose() * dym;
        col2im_strip(dcol.data(), g, oy0, oy1, grad_input->plane(b, 0));
      }
    }
  }
}

Tensor4 relu(const Tensor4& input) {
  Tensor4 out(input.shape());
  const float* x = input.ptr();
  float* y = out.ptr();
  for (std::size_t i = 0; i < input.numel(); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
  return out;
}

void relu_backward(const Tensor4& output, const Tensor4& grad_output, Tensor4& grad_input) {
  require_same_shape(output.shape(), grad_output.shape(), "relu_backward");
  require_same_shape(output.shape(), grad_input.shape(), "relu_backward");
  const float* y = output.ptr();
  const float* dy = grad_output.ptr();
  float* dx = grad_input.ptr();
  for (std::size_t i = 0; i < output.numel(); ++i) {
    if (y[i] > 0.0f) dx[i] += dy[i];
  }
}

PoolResult maxpool2(const Tensor4& input) {
  const Shape& s = input.shape();
  if (s.numel() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("maxpool2: input too large " + s.to_string());
  }
  PoolResult result;
  result.truncated = (s.h % 2 != 0) || (s.w % 2 != 0);
  if (result.truncated) {
    // Odd sizes recur every epoch at the working resolution; say it once.
    static std::atomic<bool> warned{false};
    const auto level = warned.exchange(true) ? spdlog::level::debug : spdlog::level::warn;
    spdlog::log(level, "maxpool2: odd input {} truncated to even size (last row/column dropped)", s.to_string());
  }
  const std::size_t oh = s.h / 2;
  const std::size_t ow = s.w / 2;
  result.output = Tensor4({s.n, s.c, oh, ow});
  result.argmax.resize(result.output.numel());
  std::size_t o = 0;
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t base = (b * s.c + c) * s.plane();
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox, ++o) {
          const std::size_t top = base + 2 * oy * s.w + 2 * ox;
          const std::size_t window[4] = {top, top + 1, top + s.w, top + s.w + 1};
          std::size_t best = window[0];
          for (int k = 1; k < 4; ++k) {
            if (input[window[k]] > input[best]) best = window[k];
          }
          result.output[o] = input[best];
          result.argmax[o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
  return result;
}

void maxpool2_backward(const PoolResult& pool, const Tensor4& grad_output, Tensor4& grad_input) {
  require_same_shape(pool.output.shape(), grad_output.shape(), "maxpool2_backward");
  for (std::size_t o = 0; o < grad_output.numel(); ++o) grad_input[pool.argmax[o]] += grad_output[o];
}

Tensor4 bilinear_resize(const Tensor4& input, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw std::invalid_argument("bilinear_resize: target size must be positive");
  }
  const Shape& s = input.shape();
  if (s.h == out_h && s.w == out_w) return input;
  if (s.h == 0 || s.w == 0) throw std::invalid_argument("bilinear_resize: empty input");
  const auto ys = axis_samples(s.h, out_h);
  const auto xs = axis_samples(s.w, out_w);
  Tensor4 out({s.n, s.c, out_h, out_w});
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float* src = input.plane(b, c);
      float* dst = out.plane(b, c);
      for (std::size_t y = 0; y < out_h; ++y) {
        const AxisSample& sy = ys[y];
        const float* r0 = src + sy.i0 * s.w;
        const float* r1 = src + sy.i1 * s.w;
        for (std::size_t x = 0; x < out_w; ++x) {
          const AxisSample& sx = xs[x];
          const float top = sx.w0 * r0[sx.i0] + sx.w1 * r0[sx.i1];
          const float bottom = sx.w0 * r1[sx.i0] + sx.w1 * r1[sx.i1];
          dst[y * out_w + x] = sy.w0 * top + sy.w1 * bottom;
        }
      }
    }
  }
  return out;
}

void bilinear_resize_backward(const Tensor4& grad_output, Tensor4& grad_input) {
  const Shape& so = grad_output.shape();
  const Shape& si = grad_input.shape();
  if (so.n != si.n || so.c != si.c) {
    throw std::invalid_argument("bilinear_resize_backward: " + so.to_string() + " vs " +
                                si.to_string());
  }
  if (so == si) {
    accumulate(grad_input, grad_output);
    return;
  }
  const auto ys = axis_samples(si.h, so.h);
  const auto xs = axis_samples(si.w, so.w);
  for (std::size_t b = 0; b < so.n; ++b) {
    for (std::size_t c = 0; c < so.c; ++c) {
      const float* g = grad_output.plane(b, c);
      float* d = grad_input.plane(b, c);
      for (std::size_t y = 0; y < so.h; ++y) {
        const AxisSample& sy = ys[y];
        float* r0 = d + sy.i0 * si.w;
        float* r1 = d + sy.i1 * si.w;
        for (std::size_t x = 0; x < so.w; ++x) {
          const AxisSample& sx = xs[x];
          const float v = g[y * so.w + x];
          const float top = sy.w0 * v;
          const float bottom = sy.w1 * v;
          r0[sx.i0] += sx.w0 * top;
          r0[sx.i1] += sx.w1 * top;
          r1[sx.i0] += sx.w0 * bottom;
          r1[sx.i1] += sx.w1 * bottom;
        }
      }
    }
  }
}

Tensor4 gram(const Tensor4& feature) {
  const Shape& s = feature.shape();
  if (s.n != 1) throw std::invalid_argument("gram: batch must be 1, got " + s.to_string());
  const auto n = static_cast<Eigen::Index>(s.c);
  const ConstMatMap f(feature.ptr(), n, static_cast<Eigen::Index>(s.plane()));
  Tensor4 out({1, 1, s.c, s.c});
  MatMap g(out.ptr(), n, n);
  // Symmetric rank update fills one triangle; mirroring makes G exactly
  // symmetric (a general product need not be) at half the flops.
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(f);
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) g(i, j) = g(j, i);
  }
  return out;
}

void gram_backward(const Tensor4& feature, const Tensor4& grad_output, Tensor4& grad_feature) {
  const Shape& s = feature.shape();
  require_same_shape(grad_output.shape(), {1, 1, s.c, s.c}, "gram_backward");
  require_same_shape(grad_feature.shape(), s, "gram_backward");
  const auto n = static_cast<Eigen::Index>(s.c);
  const auto m = static_cast<Eigen::Index>(s.plane());
  const ConstMatMap f(feature.ptr(), n, m);
  const ConstMatMap dg(grad_output.ptr(), n, n);
  MatMap df(grad_feature.ptr(), n, m);
  const RowMat sym = dg + dg.transpose();
  df.noalias() += sym * f;
}

Tensor4 add(const Tensor4& a, const Tensor4& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor4 out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
  return out;
}

Tensor4 sub(const Tensor4& a, const Tensor4& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Tensor4 out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] - b[i];
  return out;
}

Tensor4 mul_scalar(const Tensor4& a, float s) {
  Tensor4 out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * s;
  return out;
}

Tensor4 channelwise_affine(const Tensor4& input, std::span<const float> scale,
                           std::span<const float> shift) {
  const Shape& s = input.shape();
  require_channels(s, scale.size(), "channelwise_affine scale");
  require_channels(s, shift.size(), "channelwise_affine shift");
  Tensor4 out(s);
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float* x = input.plane(b, c);
      float* y = out.plane(b, c);
      const float k = scale[c];
      const float t = shift[c];
      for (std::size_t i = 0; i < s.plane(); ++i) y[i] = x[i] * k + t;
    }
  }
  return out;
}

Tensor4 channelwise_affine_sum(const Tensor4& a, const Tensor4& b, std::span<const float> scale,
                               std::span<const float> shift) {
  const Shape& s = a.shape();
  require_same_shape(s, b.shape(), "channelwise_affine_sum");
  require_channels(s, scale.size(), "channelwise_affine_sum scale");
  require_channels(s, shift.size(), "channelwise_affine_sum shift");
  Tensor4 out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float* x = a.plane(n, c);
      const float* z = b.plane(n, c);
      float* y = out.plane(n, c);
      const float k = scale[c];
      const float t = shift[c];
      for (std::size_t i = 0; i < s.plane(); ++i) {
        const float sum = x[i] + z[i];
        y[i] = sum * k + t;
      }
    }
  }
  return out;
}

void channelwise_affine_backward(const Tensor4& grad_output, std::span<const float> scale,
                                 Tensor4& grad_input) {
  const Shape& s = grad_output.shape();
  require_channels(s, scale.size(), "channelwise_affine_backward");
  require_same_shape(s, grad_input.shape(), "channelwise_affine_backward");
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float* g = grad_output.plane(b, c);
      float* d = grad_input.plane(b, c);
      const float k = scale[c];
      for (std::size_t i = 0; i < s.plane(); ++i) d[i] += g[i] * k;
    }
  }
}

Tensor4 channel_standardize(const Tensor4& input, std::span<const float> mean,
                            std::span<const float> stddev) {
  const Shape& s = input.shape();
  require_channels(s, mean.size(), "channel_standardize mean");
  require_channels(s, stddev.size(), "channel_standardize stddev");
  Tensor4 out(s);
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float* x = input.plane(b, c);
      float* y = out.plane(b, c);
      const float m = mean[c];
      const float sd = stddev[c];
      for (std::size_t i = 0; i < s.plane(); ++i) y[i] = (x[i] - m) / sd;
    }
  }
  return out;
}

void channel_standardize_backward(const Tensor4& grad_output, std::span<const float> stddev,
                                  Tensor4& grad_input) {
  const Shape& s = grad_output.shape();
  require_channels(s, stddev.size(), "channel_standardize_backward");
  require_same_shape(s, grad_input.shape(), "channel_standardize_backward");
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float* g = grad_output.plane(b, c);
      float* d = grad_input.plane(b, c);
      const float sd = stddev[c];
      for (std::size_t i = 0; i < s.plane(); ++i) d[i] += g[i] / sd;
    }
  }
}

float sum_of_squares(const Tensor4& input) {
  double sum = 0.0;
  for (float v : input.data()) sum += static_cast<double>(v) * v;
  return static_cast<float>(sum);
}

void sum_of_squares_backward(const Tensor4& input, float grad_output, Tensor4& grad_input) {
  require_same_shape(input.shape(), grad_input.shape(), "sum_of_squares_backward");
  const float k = 2.0f * grad_output;
  for (std::size_t i = 0; i < input.numel(); ++i) grad_input[i] += k * input[i];
}

void accumulate(Tensor4& dst, const Tensor4& src, float scale) {
  require_same_shape(dst.shape(), src.shape(), "accumulate");
  float* d = dst.ptr();
  const float* s = src.ptr();
  if (scale == 1.0f) {
    for (std::size_t i = 0; i < src.numel(); ++i) d[i] += s[i];
  } else {
    for (std::size_t i = 0; i < src.numel(); ++i) d[i] += scale * s[i];
  }
}

}  // namespace ipst::kernels
