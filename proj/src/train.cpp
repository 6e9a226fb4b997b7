// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ipst/optim.hpp"

namespace ipst {
namespace {

std::shared_ptr<const Tensor4> borrow(const Tensor4& t) {
  return {&t, [](const Tensor4*) {}};
}

void require_image(const Tensor4& image, const char* what) {
  const Shape& s = image.shape();
  if (s.n != 1 || s.c != 3) {
    throw std::invalid_argument(std::string(what) + ": expected (1,3,h,w) RGB image, got " +
                                s.to_string());
  }
  if (s.h < kMinFeatureInput || s.w < kMinFeatureInput) {
    throw std::invalid_argument(std::string(what) + " image " + s.to_string() +
                                " is smaller than 32 pixels on a side");
  }
}

}  // namespace

void TransferConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (patience_init < 1) throw std::invalid_argument("patience must be at least 1");
  if (sd_height < 16) throw std::invalid_argument("sd_height must be at least 16");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
  if (!(channel_multiplier > 0.0)) throw std::invalid_argument("channel multiplier must be positive");
  if (!(improvement_threshold >= 0.0)) throw std::invalid_argument("improvement threshold must be non-negative");
}

TrainResult train(const Tensor4& content, const Tensor4& style, const VggWeights& weights,
                  const TransferConfig& config, const EpochObserver& observer) {
  config.validate();
  require_image(content, "content");
  require_image(style, "style");

  const StyleNetOptions net_options{config.sd_height, !config.disable_shortcut};
  const EarlyStopRule rule{config.patience_init, config.improvement_threshold,
                           config.strict_prose_stopping};
  const bool adaptive = !config.disable_adaptive_alpha;

  // Loss-side constants: computed once, at loss resolution.
  const auto content_f4 = std::make_shared<const Tensor4>(
      extract_features(downsample_to_sd(content, config.sd_height), weights).taps.at(4));
  const StyleTargets style_targets =
      make_style_targets(extract_features(downsample_to_sd(style, config.sd_height), weights));

  TrainResult result;
  result.params = init_params(config.seed, config.channel_multiplier);
  AdamState adam;
  adam.config.lr = config.lr;
  AdaptiveState state = make_adaptive_state(rule);

  bool keep_going = true;
  while (keep_going && state.epoch < config.max_epochs) {
    ad::Tape tape;
    const ParamVars params = add_params(tape, result.params);
    const ad::Var input = tape.constant(borrow(content));
    const ad::Var output = stylenet_forward(tape, input, params, net_options);
    const ad::Var output_sd = downsample_to_sd(tape, output, config.sd_height);
    const FeatureTaps features = extract_features(tape, output_sd, weights);
    const ad::Var closs = content_loss(tape, tape.constant(content_f4), features.taps.at(4));
    const ad::Var sloss = style_loss(tape, features, style_targets);

    LossBreakdown row;
    row.content_loss = tape.value(closs).item();
    row.style_loss = tape.value(sloss).item();
    if (!state.initialized) {
      record_initial_losses(state, row.content_loss, row.content_loss + row.style_loss,
                            config.total_as_initial);
    }
    row.alpha = adaptive ? compute_alpha(row.content_loss, state.initial_content_loss) : 1.0;
    row.total_loss = row.alpha * row.content_loss + row.style_loss;
    if (!std::isfinite(row.total_loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << state.epoch + 1 << ": content=" << row.content_loss
          << " style=" << row.style_loss << " alpha=" << row.alpha;
      throw std::runtime_error(msg.str());
    }
    if (adaptive) {
      keep_going = early_stop_update(state, row.total_loss, rule);
    } else {
      ++state.epoch;
    }
    row.epoch = state.epoch;
    row.patience = state.patience;

    const ad::Var total = ad::add(tape, ad::mul_scalar(tape, closs, static_cast<float>(row.alpha)), sloss);
    tape.backward_and_release(total);
    std::vector<Tensor4> grads;
    grads.reserve(kStyleNetLayers);
    for (const ad::Var p : params) {
      const Tensor4* g = tape.grad(p);
      grads.push_back(g != nullptr ? *g : Tensor4(tape.value(p).shape()));
      if (!grads.back().all_finite()) {
        throw std::runtime_error("non-finite gradient at epoch " + std::to_string(row.epoch));
      }
    }
    adam_step(result.params.kernels, grads, adam);

    result.history.push_back(row);
    if (observer) observer(row);
  }
  result.stop_reason = keep_going ? StopReason::epoch_cap : StopReason::patience_exhausted;
  return result;
}

void write_history_csv(const std::vector<LossBreakdown>& history, std::ostream& out) {
  out << "epoch,content_loss,style_loss,alpha,total_loss,patience\n";
  char line[256];
  for (const auto& row : history) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g,%d\n", row.epoch, row.content_loss,
                  row.style_loss, row.alpha, row.total_loss, row.patience);
    out << line;
  }
}

void save_history_csv(const std::vector<LossBreakdown>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_history_csv(history, out);
}

}  // namespace ipst
