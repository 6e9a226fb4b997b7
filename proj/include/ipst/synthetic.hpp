// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <cstdint>

#include "ipst/tensor.hpp"

namespace ipst {

/// Procedural landscape (sky gradient, hills, a sun, scattered blobs and
/// fine value noise) in RGB [0,1]. Layout is in normalized coordinates, so
/// the same seed gives the same picture at any resolution; the palette and
/// layout vary with the seed. Used for benchmarks and tests.
Tensor4 make_test_scene(std::size_t height, std::size_t width, std::uint64_t seed);

}  // namespace ipst
