// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

// Process-wide test fixtures that are expensive to rebuild per test.

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "ipst/vgg.hpp"

namespace ipst::testing_support {

/// Seed of the synthetic weight set the committed probe dump was made with.
inline constexpr std::uint64_t kFixtureVggSeed = 7;

inline const VggWeights& fixture_vgg() {
  static const VggWeights weights = make_synthetic_vgg_weights(kFixtureVggSeed);
  return weights;
}

inline std::filesystem::path fixture_dir() { return IPST_FIXTURE_DIR; }

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("ipst_test_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace ipst::testing_support
