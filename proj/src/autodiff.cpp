// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/autodiff.hpp"

#include <stdexcept>
#include <string>
#include <utility>

#include "ipst/kernels.hpp"

namespace ipst::ad {

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("tape: unknown variable");
  return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw std::out_of_range("tape: unknown variable");
  return nodes_[v.id];
}

Var Tape::leaf(Tensor4 value, bool requires_grad) {
  Node n;
  n.value = std::make_shared<const Tensor4>(std::move(value));
  n.requires_grad = requires_grad;
  n.leaf = true;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::constant(Tensor4 value) { return leaf(std::move(value), false); }

Var Tape::constant(std::shared_ptr<const Tensor4> value) {
  if (!value) throw std::invalid_argument("tape: null constant");
  Node n;
  n.value = std::move(value);
  n.leaf = true;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

const Tensor4& Tape::value(Var v) const {
  const Node& n = node(v);
  if (!n.value) throw std::logic_error("tape: value was released by a consuming backward pass");
  return *n.value;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

const Tensor4* Tape::grad(Var v) const {
  const Node& n = node(v);
  return n.grad.empty() && (!n.value || n.value->numel() != 0) ? nullptr : &n.grad;
}

Var Tape::record(Tensor4 value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node n;
  n.value = std::make_shared<const Tensor4>(std::move(value));
  for (Var in : inputs) {
    if (node(in).requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Tensor4& Tape::grad_buffer(Var v) {
  Node& n = node(v);
  if (!n.requires_grad) throw std::logic_error("tape: gradient requested for constant node");
  if (n.grad.empty()) n.grad = Tensor4(n.value->shape());
  return n.grad;
}

void Tape::backward(Var root) {
  if (value(root).numel() != 1) {
    throw std::invalid_argument("backward: root is not a scalar " + value(root).shape().to_string());
  }
  backward(root, Tensor4({1, 1, 1, 1}, 1.0f));
}

void Tape::backward(Var root, const Tensor4& seed) { sweep(root, seed, false); }

void Tape::backward_and_release(Var root) {
  if (value(root).numel() != 1) {
    throw std::invalid_argument("backward: root is not a scalar " + value(root).shape().to_string());
  }
  sweep(root, Tensor4({1, 1, 1, 1}, 1.0f), true);
}

void Tape::sweep(Var root, const Tensor4& seed, bool release) {
  require_same_shape(value(root).shape(), seed.shape(), "backward seed");
  if (!node(root).requires_grad) {
    throw std::logic_error("backward: root does not depend on any grad-requiring leaf");
  }
  for (Node& n : nodes_) {
    if (!n.leaf) n.grad = Tensor4{};
  }
  kernels::accumulate(grad_buffer(root), seed);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) {
      // The closure may add into nodes below i only, so moving the gradient
      // out first is safe and frees it right after use.
      const Tensor4 g = std::move(n.grad);
      n.grad = Tensor4{};
      n.backward(*this, g);
    } else if (!n.leaf) {
      n.grad = Tensor4{};
    }
    // Closures only read their own node and its inputs, all at indices <= i,
    // so nothing left in the sweep needs this node's value or closure.
    if (release && !n.leaf) {
      n.value.reset();
      n.backward = nullptr;
    }
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) n.grad = Tensor4{};
}

Var conv2d(Tape& tape, Var input, Var weight, std::optional<Var> bias, std::size_t padding) {
  const Tensor4* bias_value = bias ? &tape.value(*bias) : nullptr;
  Tensor4 out = kernels::conv2d(tape.value(input), tape.value(weight), bias_value, padding);
  auto backward = [input, weight, bias, padding](Tape& t, const Tensor4& g) {
    Tensor4* gi = t.requires_grad(input) ? &t.grad_buffer(input) : nullptr;
    Tensor4* gw = t.requires_grad(weight) ? &t.grad_buffer(weight) : nullptr;
    Tensor4* gb = bias && t.requires_grad(*bias) ? &t.grad_buffer(*bias) : nullptr;
    kernels::conv2d_backward(t.value(input), t.value(weight), padding, g, gi, gw, gb);
  };
  if (bias) return tape.record(std::move(out), {input, weight, *bias}, backward);
  return tape.record(std::move(out), {input, weight}, backward);
}

Var relu(Tape& tape, Var input) {
  Tensor4 out = kernels::relu(tape.value(input));
  const Var self{tape.size()};
  return tape.record(std::move(out), {input}, [input, self](Tape& t, const Tensor4& g) {
    kernels::relu_backward(t.value(self), g, t.grad_buffer(input));
  });
}

Var maxpool2(Tape& tape, Var input) {
  auto pool = std::make_shared<kernels::PoolResult>(kernels::maxpool2(tape.value(input)));
  Tensor4 out = pool->output;
  return tape.record(std::move(out), {input}, [input, pool](Tape& t, const Tensor4& g) {
    kernels::maxpool2_backward(*pool, g, t.grad_buffer(input));
  });
}

Var bilinear_resize(Tape& tape, Var input, std::size_t out_h, std::size_t out_w) {
  Tensor4 out = kernels::bilinear_resize(tape.value(input), out_h, out_w);
  return tape.record(std::move(out), {input}, [input](Tape& t, const Tensor4& g) {
    kernels::bilinear_resize_backward(g, t.grad_buffer(input));
  });
}

Var gram(Tape& tape, Var feature) {
  Tensor4 out = kernels::gram(tape.value(feature));
  return tape.record(std::move(out), {feature}, [feature](Tape& t, const Tensor4& g) {
    kernels::gram_backward(t.value(feature), g, t.grad_buffer(feature));
  });
}

Var add(Tape& tape, Var a, Var b) {
  Tensor4 out = kernels::add(tape.value(a), tape.value(b));
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor4& g) {
    if (t.requires_grad(a)) kernels::accumulate(t.grad_buffer(a), g);
    if (t.requires_grad(b)) kernels::accumulate(t.grad_buffer(b), g);
  });
}

Var sub(Tape& tape, Var a, Var b) {
  Tensor4 out = kernels::sub(tape.value(a), tape.value(b));
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor4& g) {
    if (t.requires_grad(a)) kernels::accumulate(t.grad_buffer(a), g);
    if (t.requires_grad(b)) kernels::accumulate(t.grad_buffer(b), g, -1.0f);
  });
}

Var mul_scalar(Tape& tape, Var a, float s) {
  Tensor4 out = kernels::mul_scalar(tape.value(a), s);
  return tape.record(std::move(out), {a}, [a, s](Tape& t, const Tensor4& g) {
    kernels::accumulate(t.grad_buffer(a), g, s);
  });
}

Var channelwise_affine(Tape& tape, Var input, std::span<const float> scale,
                       std::span<const float> shift) {
  Tensor4 out = kernels::channelwise_affine(tape.value(input), scale, shift);
  std::vector<float> k(scale.begin(), scale.end());
  return tape.record(std::move(out), {input}, [input, k = std::move(k)](Tape& t, const Tensor4& g) {
    kernels::channelwise_affine_backward(g, k, t.grad_buffer(input));
  });
}

Var channelwise_affine_sum(Tape& tape, Var a, Var b, std::span<const float> scale,
                           std::span<const float> shift) {
  Tensor4 out = kernels::channelwise_affine_sum(tape.value(a), tape.value(b), scale, shift);
  std::vector<float> k(scale.begin(), scale.end());
  return tape.record(std::move(out), {a, b}, [a, b, k = std::move(k)](Tape& t, const Tensor4& g) {
    if (t.requires_grad(a)) kernels::channelwise_affine_backward(g, k, t.grad_buffer(a));
    if (t.requires_grad(b)) kernels::channelwise_affine_backward(g, k, t.grad_buffer(b));
  });
}

Var channel_standardize(Tape& tape, Var input, std::span<const float> mean,
                        std::span<const float> stddev) {
  Tensor4 out = kernels::channel_standardize(tape.value(input), mean, stddev);
  std::vector<float> sd(stddev.begin(), stddev.end());
  return tape.record(std::move(out), {input}, [input, sd = std::move(sd)](Tape& t, const Tensor4& g) {
    kernels::channel_standardize_backward(g, sd, t.grad_buffer(input));
  });
}

Var sum_of_squares(Tape& tape, Var input) {
  Tensor4 out({1, 1, 1, 1}, kernels::sum_of_squares(tape.value(input)));
  return tape.record(std::move(out), {input}, [input](Tape& t, const Tensor4& g) {
    kernels::sum_of_squares_backward(t.value(input), g[0], t.grad_buffer(input));
  });
}

}  // namespace ipst::ad
