// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/vgg.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ipst/kernels.hpp"
#include "ipst/norm_constants.hpp"

static_assert(std::endian::native == std::endian::little,
              "IPSTVGG1 I/O assumes a little-endian host");

namespace ipst {
namespace {

constexpr char kMagic[8] = {'I', 'P', 'S', 'T', 'V', 'G', 'G', '1'};
constexpr char kDumpMagic[8] = {'I', 'P', 'S', 'T', 'A', 'C', 'T', '1'};

// Block index whose relu output is tapped after this layer, or 0.
int tap_after(std::string_view layer) {
  if (layer.size() == 7 && layer.substr(5) == "_1") return layer[4] - '0';
  return 0;
}

bool pool_after(std::string_view layer) {
  return layer == "conv1_2" || layer == "conv2_2" || layer == "conv3_4" || layer == "conv4_4";
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw VggLoadError(std::string("truncated file while reading ") + what);
  }
  return value;
}

void read_floats(std::istream& in, std::span<float> dst, const std::string& what) {
  if (!in.read(reinterpret_cast<char*>(dst.data()),
               static_cast<std::streamsize>(dst.size() * sizeof(float)))) {
    throw VggLoadError("truncated file while reading " + what);
  }
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_image(const Shape& s) {
  if (s.n != 1 || s.c != 3) {
    throw std::invalid_argument("extract_features: expected (1,3,h,w) image, got " + s.to_string());
  }
  if (s.h < kMinFeatureInput || s.w < kMinFeatureInput) {
    throw std::invalid_argument("extract_features: image " + s.to_string() +
                                " smaller than 32 pixels on a side");
  }
}

void require_blocks(const auto& taps, const char* what) {
  for (int b = 1; b <= kFeatureBlocks; ++b) {
    if (!taps.contains(b)) {
      throw std::invalid_argument(std::string(what) + ": missing block " + std::to_string(b));
    }
  }
}

}  // namespace

std::size_t canonical_vgg_parameter_count() {
  std::size_t total = 0;
  for (const auto& entry : kVggSchema) total += entry.out_c * entry.in_c * 9 + entry.out_c;
  return total;
}

std::size_t VggWeights::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.weight->numel() + layer.bias->numel();
  return total;
}

void validate_vgg_schema(const VggWeights& weights) {
  for (std::size_t i = 0; i < kVggSchema.size(); ++i) {
    const auto& entry = kVggSchema[i];
    if (i >= weights.layers.size()) {
      throw VggLoadError("shape mismatch: missing layer " + std::string(entry.name));
    }
    const VggLayer& layer = weights.layers[i];
    if (layer.name != entry.name) {
      throw VggLoadError("shape mismatch: expected layer " + std::string(entry.name) +
                         " at position " + std::to_string(i) + ", found " + layer.name);
    }
    const Shape expected{entry.out_c, entry.in_c, 3, 3};
    if (!(layer.weight->shape() == expected)) {
      throw VggLoadError("shape mismatch: layer " + layer.name + " has weight " +
                         layer.weight->shape().to_string() + ", expected " + expected.to_string());
    }
    if (layer.bias->numel() != entry.out_c) {
      throw VggLoadError("shape mismatch: layer " + layer.name + " has " +
                         std::to_string(layer.bias->numel()) + " biases, expected " +
                         std::to_string(entry.out_c));
    }
  }
  if (weights.layers.size() > kVggSchema.size()) {
    throw VggLoadError("shape mismatch: unexpected extra layer " +
                       weights.layers[kVggSchema.size()].name);
  }
}

VggWeights read_vgg_weights(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw VggLoadError("bad magic: not an IPSTVGG1 file");
  }
  const auto count = get<std::uint32_t>(in, "layer count");
  if (count > 1024) throw VggLoadError("implausible layer count " + std::to_string(count));

  struct Header {
    std::string name;
    Shape shape;
  };
  std::vector<Header> headers(count);
  for (auto& h : headers) {
    const auto len = get<std::uint16_t>(in, "layer name length");
    h.name.resize(len);
    if (!in.read(h.name.data(), len)) throw VggLoadError("truncated IPSTVGG1 file in layer name");
    const auto out_c = get<std::uint32_t>(in, "dims");
    const auto in_c = get<std::uint32_t>(in, "dims");
    const auto kh = get<std::uint32_t>(in, "dims");
    const auto kw = get<std::uint32_t>(in, "dims");
    h.shape = {out_c, in_c, kh, kw};
  }

  // Check the header table before reading any payload so a schema problem
  // is reported by layer name instead of as a truncation.
  VggWeights weights;
  for (const auto& h : headers) {
    weights.layers.push_back({h.name, std::make_shared<const Tensor4>(h.shape),
                              std::make_shared<const Tensor4>(Shape{1, h.shape.n, 1, 1})});
  }
  validate_vgg_schema(weights);

  for (std::size_t i = 0; i < headers.size(); ++i) {
    Tensor4 w(headers[i].shape);
    Tensor4 b({1, headers[i].shape.n, 1, 1});
    read_floats(in, w.data(), headers[i].name + " weights");
    read_floats(in, b.data(), headers[i].name + " bias");
    weights.layers[i].weight = std::make_shared<const Tensor4>(std::move(w));
    weights.layers[i].bias = std::make_shared<const Tensor4>(std::move(b));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw VggLoadError("trailing bytes after IPSTVGG1 payload");
  }
  return weights;
}

VggWeights load_vgg_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VggLoadError("cannot open VGG weights " + path.string());
  try {
    return read_vgg_weights(in);
  } catch (const VggLoadError& e) {
    throw VggLoadError(path.string() + ": " + e.what());
  }
}

void write_vgg_weights(const VggWeights& weights, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(weights.layers.size()));
  for (const auto& layer : weights.layers) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(layer.name.size()));
    out.write(layer.name.data(), static_cast<std::streamsize>(layer.name.size()));
    const Shape& s = layer.weight->shape();
    for (std::size_t d : {s.n, s.c, s.h, s.w}) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  for (const auto& layer : weights.layers) {
    for (const Tensor4* t : {layer.weight.get(), layer.bias.get()}) {
      out.write(reinterpret_cast<const char*>(t->ptr()),
                static_cast<std::streamsize>(t->numel() * sizeof(float)));
    }
  }
}

void save_vgg_weights(const VggWeights& weights, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_vgg_weights(weights, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

VggWeights make_synthetic_vgg_weights(std::uint64_t seed) {
  VggWeights weights;
  std::uint64_t counter = seed << 32;
  auto uniform = [&counter] {
    const std::uint64_t z = splitmix64(counter++);
    return static_cast<double>(z >> 40) * 0x1p-24;
  };
  for (const auto& entry : kVggSchema) {
    Tensor4 w({entry.out_c, entry.in_c, 3, 3});
    const double bound = std::sqrt(6.0 / static_cast<double>(entry.in_c * 9));
    for (float& v : w.data()) v = static_cast<float>(bound * (2.0 * uniform() - 1.0));
    Tensor4 b({1, entry.out_c, 1, 1});
    for (float& v : b.data()) v = static_cast<float>(0.05 * (2.0 * uniform() - 1.0));
    weights.layers.push_back({std::string(entry.name), std::make_shared<const Tensor4>(std::move(w)),
                              std::make_shared<const Tensor4>(std::move(b))});
  }
  return weights;
}

std::uint64_t vgg_checksum(const VggWeights& weights) {
  std::ostringstream buffer(std::ios::binary);
  write_vgg_weights(weights, buffer);
  const std::string bytes = std::move(buffer).str();
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

FeatureTaps extract_features(ad::Tape& tape, ad::Var image, const VggWeights& weights) {
  check_image(tape.value(image).shape());
  FeatureTaps out;
  ad::Var x = ad::channel_standardize(tape, image, kImageNet.mean, kImageNet.stddev);
  for (const auto& layer : weights.layers) {
    const ad::Var w = tape.constant(layer.weight);
    const ad::Var b = tape.constant(layer.bias);
    x = ad::relu(tape, ad::conv2d(tape, x, w, b, 1));
    if (const int block = tap_after(layer.name)) {
      out.taps[block] = x;
      if (block == kFeatureBlocks) break;
    }
    if (pool_after(layer.name)) x = ad::maxpool2(tape, x);
  }
  require_blocks(out.taps, "extract_features");
  return out;
}

FeatureSet extract_features(const Tensor4& image, const VggWeights& weights) {
  check_image(image.shape());
  FeatureSet out;
  Tensor4 x = kernels::channel_standardize(image, kImageNet.mean, kImageNet.stddev);
  for (const auto& layer : weights.layers) {
    x = kernels::relu(kernels::conv2d(x, *layer.weight, layer.bias.get(), 1));
    if (const int block = tap_after(layer.name)) {
      out.taps[block] = x;
      if (block == kFeatureBlocks) break;
    }
    if (pool_after(layer.name)) x = kernels::maxpool2(x).output;
  }
  require_blocks(out.taps, "extract_features");
  return out;
}

FeatureSet read_activation_dump(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kDumpMagic, sizeof magic) != 0) {
    throw VggLoadError("bad magic: not an IPSTACT1 file");
  }
  FeatureSet features;
  const auto count = get<std::uint32_t>(in, "tap count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto block = static_cast<int>(get<std::uint32_t>(in, "tap block"));
    Shape s;
    s.n = get<std::uint32_t>(in, "tap shape");
    s.c = get<std::uint32_t>(in, "tap shape");
    s.h = get<std::uint32_t>(in, "tap shape");
    s.w = get<std::uint32_t>(in, "tap shape");
    Tensor4 t(s);
    read_floats(in, t.data(), "relu" + std::to_string(block) + "_1");
    if (!features.taps.emplace(block, std::move(t)).second) {
      throw VggLoadError("duplicate tap for block " + std::to_string(block));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw VggLoadError("trailing bytes after IPSTACT1 payload");
  return features;
}

FeatureSet load_activation_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VggLoadError("cannot open " + path.string());
  try {
    return read_activation_dump(in);
  } catch (const VggLoadError& e) {
    throw VggLoadError(path.string() + ": " + e.what());
  }
}

void write_activation_dump(const FeatureSet& features, std::ostream& out) {
  out.write(kDumpMagic, sizeof kDumpMagic);
  put(out, static_cast<std::uint32_t>(features.taps.size()));
  for (const auto& [block, t] : features.taps) {
    put(out, static_cast<std::uint32_t>(block));
    const Shape& s = t.shape();
    for (const std::size_t d : {s.n, s.c, s.h, s.w}) put(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.ptr()), static_cast<std::streamsize>(t.numel() * sizeof(float)));
  }
}

StyleTargets make_style_targets(const FeatureSet& features) {
  require_blocks(features.taps, "make_style_targets");
  StyleTargets targets;
  for (int b = 1; b <= kFeatureBlocks; ++b) {
    targets.grams[b] = std::make_shared<const Tensor4>(kernels::gram(features.taps.at(b)));
  }
  return targets;
}

ad::Var content_loss(ad::Tape& tape, ad::Var content_f4, ad::Var output_f4) {
  const Shape& s = tape.value(output_f4).shape();
  require_same_shape(tape.value(content_f4).shape(), s, "content_loss");
  const ad::Var diff = ad::sub(tape, content_f4, output_f4);
  const double norm = static_cast<double>(s.c) * static_cast<double>(s.plane());
  return ad::mul_scalar(tape, ad::sum_of_squares(tape, diff), static_cast<float>(1.0 / norm));
}

double content_loss(const Tensor4& content_f4, const Tensor4& output_f4) {
  ad::Tape tape;
  const ad::Var c = tape.constant(std::shared_ptr<const Tensor4>(&content_f4, [](const Tensor4*) {}));
  const ad::Var o = tape.constant(std::shared_ptr<const Tensor4>(&output_f4, [](const Tensor4*) {}));
  return tape.value(content_loss(tape, c, o)).item();
}

namespace {

ad::Var style_sum(ad::Tape& tape, const FeatureTaps& output, auto&& target_gram) {
  require_blocks(output.taps, "style_loss");
  ad::Var total;
  for (int b = 1; b <= kFeatureBlocks; ++b) {
    const ad::Var feature = output.taps.at(b);
    const Shape& s = tape.value(feature).shape();
    const ad::Var g = ad::gram(tape, feature);
    const ad::Var a = target_gram(b);
    require_same_shape(tape.value(a).shape(), tape.value(g).shape(), "style_loss gram");
    const double norm = static_cast<double>(s.c) * static_cast<double>(s.plane());
    const ad::Var term = ad::mul_scalar(tape, ad::sum_of_squares(tape, ad::sub(tape, g, a)),
                                        static_cast<float>(1.0 / norm));
    total = total.valid() ? ad::add(tape, total, term) : term;
  }
  return total;
}

}  // namespace

ad::Var style_loss(ad::Tape& tape, const FeatureTaps& output, const FeatureTaps& style) {
  require_blocks(style.taps, "style_loss");
  return style_sum(tape, output, [&](int b) { return ad::gram(tape, style.taps.at(b)); });
}

ad::Var style_loss(ad::Tape& tape, const FeatureTaps& output, const StyleTargets& style) {
  require_blocks(style.grams, "style_loss");
  return style_sum(tape, output, [&](int b) { return tape.constant(style.grams.at(b)); });
}

double style_loss(const FeatureSet& output, const FeatureSet& style) {
  require_blocks(output.taps, "style_loss");
  require_blocks(style.taps, "style_loss");
  ad::Tape tape;
  FeatureTaps o;
  FeatureTaps s;
  auto borrow = [&tape](const Tensor4& t) {
    return tape.constant(std::shared_ptr<const Tensor4>(&t, [](const Tensor4*) {}));
  };
  for (int b = 1; b <= kFeatureBlocks; ++b) {
    o.taps[b] = borrow(output.taps.at(b));
    s.taps[b] = borrow(style.taps.at(b));
  }
  return tape.value(style_loss(tape, o, s)).item();
}

}  // namespace ipst
