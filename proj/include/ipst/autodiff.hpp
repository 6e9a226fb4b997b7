// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ipst/tensor.hpp"

namespace ipst::ad {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;

  bool valid() const noexcept { return id != npos; }
};

/// Reverse-mode tape: every op appends a node holding its value and a
/// closure that pushes the node's gradient into its inputs.
///
/// Nodes that do not depend on a grad-requiring leaf store no closure, so
/// frozen weights and constant images cost nothing on the backward pass.
/// A tape belongs to one thread.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor4& grad_output)>;

  Var leaf(Tensor4 value, bool requires_grad = true);
  Var constant(Tensor4 value);
  /// Shares the tensor rather than copying it.
  Var constant(std::shared_ptr<const Tensor4> value);

  const Tensor4& value(Var v) const;
  bool requires_grad(Var v) const;
  /// Null until a backward pass has reached `v`. Only leaves keep their
  /// gradient after backward() returns.
  const Tensor4* grad(Var v) const;

  /// Seeds d(root)/d(root) = 1; root must hold a single element.
  void backward(Var root);
  /// Seeds the root gradient with `seed` (same shape as the root value).
  /// Leaf gradients accumulate across calls; interior ones are rebuilt.
  void backward(Var root, const Tensor4& seed);

  /// Scalar-root backward that also frees each interior node's value and
  /// closure as soon as the sweep has passed it, lowering peak memory. Leaves
  /// stay readable; value() on any other node throws afterwards.
  void backward_and_release(Var root);

  /// Drops every leaf gradient.
  void zero_grad();

  std::size_t size() const noexcept { return nodes_.size(); }

  // Op-authoring interface.
  Var record(Tensor4 value, std::initializer_list<Var> inputs, BackwardFn backward);
  /// Zero-initialised on first use. Only valid for grad-requiring nodes.
  Tensor4& grad_buffer(Var v);

 private:
  struct Node {
    std::shared_ptr<const Tensor4> value;
    Tensor4 grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool leaf = false;
  };

  const Node& node(Var v) const;
  Node& node(Var v);
  void sweep(Var root, const Tensor4& seed, bool release);

  std::vector<Node> nodes_;
};

Var conv2d(Tape& tape, Var input, Var weight, std::optional<Var> bias, std::size_t padding);
Var relu(Tape& tape, Var input);
Var maxpool2(Tape& tape, Var input);
Var bilinear_resize(Tape& tape, Var input, std::size_t out_h, std::size_t out_w);
Var gram(Tape& tape, Var feature);
Var add(Tape& tape, Var a, Var b);
Var sub(Tape& tape, Var a, Var b);
Var mul_scalar(Tape& tape, Var a, float s);
/// (a + b) * scale[c] + shift[c] as one node.
Var channelwise_affine_sum(Tape& tape, Var a, Var b, std::span<const float> scale,
                           std::span<const float> shift);
Var channelwise_affine(Tape& tape, Var input, std::span<const float> scale,
                       std::span<const float> shift);
Var channel_standardize(Tape& tape, Var input, std::span<const float> mean,
                        std::span<const float> stddev);
/// Returns a (1,1,1,1) scalar.
Var sum_of_squares(Tape& tape, Var input);

}  // namespace ipst::ad
