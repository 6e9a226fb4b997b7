// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace ipst {

/// Everything that parameterizes one training run.
struct TransferConfig {
  double lr = 0.001;
  int patience_init = 10;
  double improvement_threshold = 0.01;
  std::size_t sd_height = 480;
  /// 1.0 reference network; 4.0 and 0.25 are the model-size ablations.
  double channel_multiplier = 1.0;
  /// alpha fixed at 1 and early stopping off; runs exactly max_epochs.
  bool disable_adaptive_alpha = false;
  bool disable_shortcut = false;
  bool strict_prose_stopping = false;
  /// Record the epoch-1 total loss (rather than the content loss) as the
  /// early-stopping reference.
  bool total_as_initial = false;
  int max_epochs = 500;
  std::uint64_t seed = 0;
  std::string vgg_weights_path;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

}  // namespace ipst
