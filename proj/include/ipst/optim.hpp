// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <limits>
#include <span>
#include <vector>

#include "ipst/tensor.hpp"

namespace ipst {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor4> first_moment;
  std::vector<Tensor4> second_moment;
  long step = 0;
};

/// Bias-corrected Adam update in place. Moment buffers are created on the
/// first call and must keep the params' shapes afterwards.
void adam_step(std::span<Tensor4> params, std::span<const Tensor4> grads, AdamState& state);

/// exp(content / initial - 1), with the denominator floored at 1e-8.
double compute_alpha(double content_loss, double initial_content_loss);

struct EarlyStopRule {
  int patience_init = 10;
  double improvement_threshold = 0.01;
  /// false: improvement iff ratio - best < threshold (as in the algorithm
  /// listing). true: improvement iff best - ratio >= threshold.
  bool strict_prose = false;
};

/// Bookkeeping of the instance-adaptive loop.
struct AdaptiveState {
  double initial_content_loss = 0.0;
  double initial_total_loss = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  int patience = 10;
  int epoch = 0;
  bool initialized = false;
};

AdaptiveState make_adaptive_state(const EarlyStopRule& rule = {});

/// Records the epoch-1 references. With `total_as_initial` false the initial
/// total is set from the content loss, exactly as the algorithm listing does.
void record_initial_losses(AdaptiveState& state, double content_loss, double total_loss,
                           bool total_as_initial = false);

/// One patience update from this epoch's total loss. Returns whether
/// training continues (patience != 0).
bool early_stop_update(AdaptiveState& state, double total_loss, const EarlyStopRule& rule = {});

}  // namespace ipst
