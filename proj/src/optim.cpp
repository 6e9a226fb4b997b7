// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ipst {

void adam_step(std::span<Tensor4> params, std::span<const Tensor4> grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: " + std::to_string(params.size()) + " params but " +
                                std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(params[i].shape(), grads[i].shape(), "adam_step");
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.shape());
      state.second_moment.emplace_back(p.shape());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: optimizer state tracks a different parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(params[i].shape(), state.first_moment[i].shape(), "adam_step state");
  }

  ++state.step;
  const AdamConfig& c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    float* p = params[i].ptr();
    const float* g = grads[i].ptr();
    float* m = state.first_moment[i].ptr();
    float* v = state.second_moment[i].ptr();
    for (std::size_t k = 0; k < params[i].numel(); ++k) {
      const double gk = g[k];
      const double mk = c.beta1 * m[k] + (1.0 - c.beta1) * gk;
      const double vk = c.beta2 * v[k] + (1.0 - c.beta2) * gk * gk;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      const double update = c.lr * (mk / correction1) / (std::sqrt(vk / correction2) + c.eps);
      p[k] = static_cast<float>(p[k] - update);
    }
  }
}

double compute_alpha(double content_loss, double initial_content_loss) {
  return std::exp(content_loss / std::max(initial_content_loss, 1e-8) - 1.0);
}

AdaptiveState make_adaptive_state(const EarlyStopRule& rule) {
  AdaptiveState state;
  state.patience = rule.patience_init;
  return state;
}

void record_initial_losses(AdaptiveState& state, double content_loss, double total_loss,
                           bool total_as_initial) {
  if (state.initialized) return;
  state.initial_content_loss = content_loss;
  state.initial_total_loss = total_as_initial ? total_loss : content_loss;
  state.initialized = true;
}

bool early_stop_update(AdaptiveState& state, double total_loss, const EarlyStopRule& rule) {
  ++state.epoch;
  const double ratio = total_loss / std::max(state.initial_total_loss, 1e-8);
  const bool improved = rule.strict_prose
                            ? state.best_loss - ratio >= rule.improvement_threshold
                            : ratio - state.best_loss < rule.improvement_threshold;
  if (improved) {
    state.best_loss = ratio;
    state.patience = rule.patience_init;
  } else {
    state.patience = std::max(0, state.patience - 1);
  }
  return state.patience != 0;
}

}  // namespace ipst
