// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ipst {

std::string Shape::to_string() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

Tensor4::Tensor4(Shape shape, float fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor4::Tensor4(Shape shape, std::span<const float> values) : shape_(shape) {
  if (values.size() != shape.numel()) {
    throw std::invalid_argument("tensor of shape " + shape.to_string() + " needs " +
                                std::to_string(shape.numel()) + " values, got " +
                                std::to_string(values.size()));
  }
  data_.assign(values.begin(), values.end());
}

void Tensor4::fill(float value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor4::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

float Tensor4::item() const {
  if (data_.size() != 1) {
    throw std::invalid_argument("item() on tensor of shape " + shape_.to_string());
  }
  return data_[0];
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.to_string() + " vs " +
                                b.to_string());
  }
}

float max_abs_diff(const Tensor4& a, const Tensor4& b) {
  require_same_shape(a.shape(), b.shape(), "max_abs_diff");
  float worst = 0.0f;
  for (std::size_t i = 0; i < a.numel(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace ipst
