// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <filesystem>
#include <stdexcept>

#include "ipst/tensor.hpp"

namespace ipst {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decodes an 8-bit PNG/JPEG into a (1,3,h,w) RGB tensor in [0,1].
Tensor4 load_image(const std::filesystem::path& path);

/// Clamps to [0,1], rounds to 8 bits and encodes by file extension.
void save_image(const Tensor4& image, const std::filesystem::path& path);

/// The values save_image would write, as floats in [0,1].
Tensor4 quantize_8bit(const Tensor4& image);

bool is_image_path(const std::filesystem::path& path);

}  // namespace ipst
