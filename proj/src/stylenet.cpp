// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/stylenet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "ipst/kernels.hpp"
#include "ipst/norm_constants.hpp"

static_assert(std::endian::native == std::endian::little,
              "IPSTNET1 I/O assumes a little-endian host");

namespace ipst {
namespace {

constexpr char kMagic[8] = {'I', 'P', 'S', 'T', 'N', 'E', 'T', '1'};

void require_rgb(const Shape& s, const char* what) {
  if (s.c != 3) {
    throw std::invalid_argument(std::string(what) + ": expected 3 channels, got " + s.to_string());
  }
}

std::array<Shape, kStyleNetLayers> shapes_for_width(std::size_t hidden) {
  return {{{hidden, 3, 1, 1}, {2 * hidden, hidden, 3, 3}, {hidden, 2 * hidden, 3, 3}, {3, hidden, 1, 1}}};
}

std::size_t hidden_width_for(double channel_multiplier) {
  if (!(channel_multiplier > 0.0)) {
    throw std::invalid_argument("channel multiplier must be positive");
  }
  const auto hidden = static_cast<long>(std::lround(16.0 * channel_multiplier));
  if (hidden < 1) throw std::invalid_argument("channel multiplier too small");
  return static_cast<std::size_t>(hidden);
}

Tensor4 upsample_mask(const Tensor4& mask, const Shape& target) {
  return kernels::bilinear_resize(mask, target.h, target.w);
}

}  // namespace

std::array<Shape, kStyleNetLayers> stylenet_layer_shapes(double channel_multiplier) {
  return shapes_for_width(hidden_width_for(channel_multiplier));
}

std::size_t StyleNetParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& k : kernels) total += k.numel();
  return total;
}

StyleNetParams init_params(std::uint64_t seed, double channel_multiplier) {
  const auto shapes = stylenet_layer_shapes(channel_multiplier);
  std::mt19937_64 rng(seed);
  StyleNetParams params;
  for (std::size_t l = 0; l < kStyleNetLayers; ++l) {
    const Shape& s = shapes[l];
    const double fan_in = static_cast<double>(s.c * s.h * s.w);
    double bound = std::sqrt(6.0 / fan_in);
    if (l + 1 == kStyleNetLayers) bound *= 0.1;
    std::uniform_real_distribution<float> dist(static_cast<float>(-bound), static_cast<float>(bound));
    params.kernels[l] = Tensor4(s);
    for (float& v : params.kernels[l].data()) v = dist(rng);
  }
  return params;
}

StyleNetParams zero_mask_params(double channel_multiplier) {
  StyleNetParams params = init_params(0, channel_multiplier);
  params.kernels.back().fill(0.0f);
  return params;
}

ParamVars add_params(ad::Tape& tape, const StyleNetParams& params, bool requires_grad) {
  ParamVars vars;
  for (std::size_t l = 0; l < kStyleNetLayers; ++l) vars[l] = tape.leaf(params.kernels[l], requires_grad);
  return vars;
}

ad::Var normalize(ad::Tape& tape, ad::Var image) {
  require_rgb(tape.value(image).shape(), "normalize");
  return ad::channel_standardize(tape, image, kImageNet.mean, kImageNet.stddev);
}

Tensor4 normalize(const Tensor4& image) {
  require_rgb(image.shape(), "normalize");
  return kernels::channel_standardize(image, kImageNet.mean, kImageNet.stddev);
}

ad::Var denormalize(ad::Tape& tape, ad::Var image) {
  require_rgb(tape.value(image).shape(), "denormalize");
  return ad::channelwise_affine(tape, image, kImageNet.stddev, kImageNet.mean);
}

Tensor4 denormalize(const Tensor4& image) {
  require_rgb(image.shape(), "denormalize");
  return kernels::channelwise_affine(image, kImageNet.stddev, kImageNet.mean);
}

Shape sd_shape(const Shape& input, std::size_t sd_height) {
  if (input.h == 0) throw std::invalid_argument("sd_shape: empty image");
  if (input.h <= sd_height) return input;
  const double width = static_cast<double>(sd_height) * static_cast<double>(input.w) /
                       static_cast<double>(input.h);
  const auto w = std::max<long>(1, std::lround(width));
  return {input.n, input.c, sd_height, static_cast<std::size_t>(w)};
}

ad::Var downsample_to_sd(ad::Tape& tape, ad::Var image, std::size_t sd_height) {
  const Shape& in = tape.value(image).shape();
  const Shape out = sd_shape(in, sd_height);
  if (out == in) return image;
  return ad::bilinear_resize(tape, image, out.h, out.w);
}

Tensor4 downsample_to_sd(const Tensor4& image, std::size_t sd_height) {
  const Shape out = sd_shape(image.shape(), sd_height);
  if (out == image.shape()) return image;
  return kernels::bilinear_resize(image, out.h, out.w);
}

ad::Var transform_f(ad::Tape& tape, ad::Var x, const ParamVars& params) {
  require_rgb(tape.value(x).shape(), "transform_f");
  for (std::size_t l = 0; l < kStyleNetLayers; ++l) {
    x = ad::conv2d(tape, x, params[l], std::nullopt, kStyleNetPadding[l]);
    if (l + 1 < kStyleNetLayers) x = ad::relu(tape, x);
  }
  return x;
}

Tensor4 transform_f(const Tensor4& x, const StyleNetParams& params) {
  require_rgb(x.shape(), "transform_f");
  Tensor4 y = kernels::conv2d(x, params.kernels[0], nullptr, kStyleNetPadding[0]);
  for (std::size_t l = 1; l < kStyleNetLayers; ++l) {
    y = kernels::conv2d(kernels::relu(y), params.kernels[l], nullptr, kStyleNetPadding[l]);
  }
  return y;
}

ad::Var stylenet_forward(ad::Tape& tape, ad::Var content, const ParamVars& params,
                         const StyleNetOptions& options) {
  const Shape full = tape.value(content).shape();
  const ad::Var normalized = normalize(tape, content);
  const ad::Var small = downsample_to_sd(tape, normalized, options.sd_height);
  ad::Var mask = transform_f(tape, small, params);
  if (!(tape.value(mask).shape() == full)) mask = ad::bilinear_resize(tape, mask, full.h, full.w);
  if (!options.shortcut) return denormalize(tape, mask);
  // Fused so the full-resolution sum is never stored on the tape.
  return ad::channelwise_affine_sum(tape, mask, normalized, kImageNet.stddev, kImageNet.mean);
}

Tensor4 stylenet_forward(const Tensor4& content, const StyleNetParams& params,
                         const StyleNetOptions& options) {
  Tensor4 normalized = normalize(content);
  Tensor4 mask = transform_f(downsample_to_sd(normalized, options.sd_height), params);
  if (!(mask.shape() == content.shape())) mask = upsample_mask(mask, content.shape());
  // Same per-element arithmetic as the fused tape op: (mask + x) * sd + mean.
  if (options.shortcut) {
    kernels::accumulate(mask, normalized);
  }
  normalized = Tensor4{};
  return denormalize(mask);
}

void write_params(const StyleNetParams& params, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  for (const auto& k : params.kernels) {
    out.write(reinterpret_cast<const char*>(k.ptr()),
              static_cast<std::streamsize>(k.numel() * sizeof(float)));
  }
}

StyleNetParams read_params(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ParamsLoadError("bad magic: not an IPSTNET1 file");
  }
  const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (payload.size() % sizeof(float) != 0) {
    throw ParamsLoadError("IPSTNET1 payload is not a whole number of floats");
  }
  // Payload holds 6h + 36h^2 floats for hidden width h.
  const double floats = static_cast<double>(payload.size() / sizeof(float));
  const double root = (-6.0 + std::sqrt(36.0 + 144.0 * floats)) / 72.0;
  const auto hidden = static_cast<std::size_t>(std::lround(root));
  const auto shapes = shapes_for_width(std::max<std::size_t>(hidden, 1));
  std::size_t expected = 0;
  for (const auto& s : shapes) expected += s.numel();
  if (hidden == 0 || expected * sizeof(float) != payload.size()) {
    throw ParamsLoadError("IPSTNET1 payload of " + std::to_string(payload.size()) +
                          " bytes matches no supported StyleNet width");
  }
  StyleNetParams params;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < kStyleNetLayers; ++l) {
    params.kernels[l] = Tensor4(shapes[l]);
    const std::size_t bytes = shapes[l].numel() * sizeof(float);
    std::memcpy(params.kernels[l].ptr(), payload.data() + offset, bytes);
    offset += bytes;
  }
  for (const auto& k : params.kernels) {
    if (!k.all_finite()) throw ParamsLoadError("IPSTNET1 file contains non-finite weights");
  }
  return params;
}

void save_params(const StyleNetParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_params(params, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

StyleNetParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParamsLoadError("cannot open " + path.string());
  try {
    return read_params(in);
  } catch (const ParamsLoadError& e) {
    throw ParamsLoadError(path.string() + ": " + e.what());
  }
}

}  // namespace ipst
