// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <array>

namespace ipst {

/// Per-channel RGB statistics of ImageNet, used both for the StyleNet's
/// normalized colour space and for VGG input preprocessing.
struct NormConstants {
  std::array<float, 3> mean;
  std::array<float, 3> stddev;
};

inline constexpr NormConstants kImageNet{{0.485f, 0.456f, 0.406f}, {0.229f, 0.224f, 0.225f}};

}  // namespace ipst
