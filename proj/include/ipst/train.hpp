// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ipst/config.hpp"
#include "ipst/stylenet.hpp"
#include "ipst/vgg.hpp"

namespace ipst {

struct LossBreakdown {
  int epoch = 0;
  double content_loss = 0.0;
  double style_loss = 0.0;
  double alpha = 1.0;
  /// alpha * content_loss + style_loss, in double.
  double total_loss = 0.0;
  int patience = 0;
};

enum class StopReason { patience_exhausted, epoch_cap };

struct TrainResult {
  StyleNetParams params;
  std::vector<LossBreakdown> history;
  StopReason stop_reason = StopReason::epoch_cap;
};

using EpochObserver = std::function<void(const LossBreakdown&)>;

/// Per-pair optimization of a fresh StyleNet.
///
/// Each epoch runs StyleNet on `content`, evaluates the content and style
/// losses on an sd_height copy of the output, weights the content term with
/// the instance-adaptive alpha, updates patience and takes one Adam step.
/// The loop ends when patience reaches zero or after max_epochs. alpha is a
/// plain coefficient for the gradient (no derivative through it).
///
/// Throws std::runtime_error if a loss or gradient becomes non-finite.
TrainResult train(const Tensor4& content, const Tensor4& style, const VggWeights& weights,
                  const TransferConfig& config, const EpochObserver& observer = {});

/// Columns epoch, content_loss, style_loss, alpha, total_loss, patience.
void write_history_csv(const std::vector<LossBreakdown>& history, std::ostream& out);
void save_history_csv(const std::vector<LossBreakdown>& history, const std::filesystem::path& path);

}  // namespace ipst
