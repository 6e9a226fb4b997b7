// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipst/autodiff.hpp"
#include "ipst/tensor.hpp"

namespace ipst {

struct VggLayerSpec {
  std::string_view name;
  std::size_t in_c;
  std::size_t out_c;
};

/// VGG-19 convolutions up to and including conv5_1, in execution order.
inline constexpr std::array<VggLayerSpec, 13> kVggSchema{{
    {"conv1_1", 3, 64},    {"conv1_2", 64, 64},   {"conv2_1", 64, 128},  {"conv2_2", 128, 128},
    {"conv3_1", 128, 256}, {"conv3_2", 256, 256}, {"conv3_3", 256, 256}, {"conv3_4", 256, 256},
    {"conv4_1", 256, 512}, {"conv4_2", 512, 512}, {"conv4_3", 512, 512}, {"conv4_4", 512, 512},
    {"conv5_1", 512, 512},
}};

inline constexpr int kFeatureBlocks = 5;
inline constexpr std::size_t kMinFeatureInput = 32;

/// Sum of out*in*9 + out over the schema.
std::size_t canonical_vgg_parameter_count();

struct VggLayer {
  std::string name;
  std::shared_ptr<const Tensor4> weight;  // (out_c, in_c, 3, 3)
  std::shared_ptr<const Tensor4> bias;    // (1, out_c, 1, 1)
};

/// Frozen VGG weights. Immutable after construction; share freely.
struct VggWeights {
  std::vector<VggLayer> layers;

  std::size_t parameter_count() const;
};

class VggLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the IPSTVGG1 format (docs/formats.md) and checks it against kVggSchema.
VggWeights read_vgg_weights(std::istream& in);
VggWeights load_vgg_weights(const std::filesystem::path& path);
void write_vgg_weights(const VggWeights& weights, std::ostream& out);
void save_vgg_weights(const VggWeights& weights, const std::filesystem::path& path);

/// Throws VggLoadError naming the first layer that is missing or misshapen.
void validate_vgg_schema(const VggWeights& weights);

/// Deterministic stand-in weights (Kaiming-uniform from a counter hash) for
/// tests and benchmarks where the pretrained export is unavailable. The
/// generator is mirrored in tests/fixtures/make_vgg_probe.py.
VggWeights make_synthetic_vgg_weights(std::uint64_t seed);

/// FNV-1a over the serialized IPSTVGG1 byte stream.
std::uint64_t vgg_checksum(const VggWeights& weights);

/// relu{b}_1 activations keyed by block b = 1..5.
struct FeatureSet {
  std::map<int, Tensor4> taps;
};

/// IPSTACT1 activation dump (docs/formats.md), as written by the weight
/// exporter for parity checks.
FeatureSet read_activation_dump(std::istream& in);
FeatureSet load_activation_dump(const std::filesystem::path& path);
void write_activation_dump(const FeatureSet& features, std::ostream& out);

struct FeatureTaps {
  std::map<int, ad::Var> taps;
};

/// Gram matrices of a style image, computed once per training run.
struct StyleTargets {
  std::map<int, std::shared_ptr<const Tensor4>> grams;
};

/// `image` is (1,3,h,w) RGB in [0,1]. ImageNet normalization is applied
/// first; gradients flow back to `image`.
FeatureTaps extract_features(ad::Tape& tape, ad::Var image, const VggWeights& weights);
/// Gradient-free variant; releases intermediates as it goes.
FeatureSet extract_features(const Tensor4& image, const VggWeights& weights);

StyleTargets make_style_targets(const FeatureSet& features);

/// Mean squared difference of block-4 features.
ad::Var content_loss(ad::Tape& tape, ad::Var content_f4, ad::Var output_f4);
double content_loss(const Tensor4& content_f4, const Tensor4& output_f4);

/// Sum over blocks of |G - A|^2 / (n_b h_b w_b), with n_b h_b w_b taken from
/// the output features.
ad::Var style_loss(ad::Tape& tape, const FeatureTaps& output, const FeatureTaps& style);
ad::Var style_loss(ad::Tape& tape, const FeatureTaps& output, const StyleTargets& style);
double style_loss(const FeatureSet& output, const FeatureSet& style);

}  // namespace ipst
