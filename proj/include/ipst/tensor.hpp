// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ipst/memory.hpp"

namespace ipst {

/// Dimensions of a rank-4 tensor in (batch, channel, height, width) order.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t numel() const noexcept { return n * c * h * w; }
  constexpr std::size_t plane() const noexcept { return h * w; }
  constexpr bool operator==(const Shape&) const noexcept = default;

  std::string to_string() const;
};

/// Dense float32 tensor, contiguous and row-major in (n, c, h, w).
///
/// Gradients are not stored here; they live beside the value in the tape
/// node that owns it (see autodiff.hpp).
class Tensor4 {
 public:
  using Storage = std::vector<float, memory::CountingAllocator<float>>;

  Tensor4() = default;
  explicit Tensor4(Shape shape, float fill = 0.0f);
  Tensor4(Shape shape, std::span<const float> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  float* ptr() noexcept { return data_.data(); }
  const float* ptr() const noexcept { return data_.data(); }

  float* plane(std::size_t n, std::size_t c) noexcept {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }
  const float* plane(std::size_t n, std::size_t c) const noexcept {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }

  float& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }
  float at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }

  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(float value) noexcept;
  bool all_finite() const noexcept;

  /// Scalar value of a single-element tensor.
  float item() const;

 private:
  Shape shape_{};
  Storage data_;
};

/// Throws std::invalid_argument naming both shapes if they differ.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

float max_abs_diff(const Tensor4& a, const Tensor4& b);

}  // namespace ipst
