// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#pragma once

#include <cstddef>
#include <new>

/// Byte counters for every tensor and scratch buffer the engine allocates.
///
/// The benchmark reports peak usage from these counters rather than from the
/// OS, so the numbers cover engine data only and are reproducible. An optional
/// soft limit turns oversized requests into std::bad_alloc before the kernel's
/// OOM killer gets involved.
namespace ipst::memory {

std::size_t current_bytes() noexcept;
std::size_t peak_bytes() noexcept;

/// Resets the peak to the current usage.
void reset_peak() noexcept;

/// 0 disables the limit.
void set_limit(std::size_t bytes) noexcept;
std::size_t limit() noexcept;

void* allocate(std::size_t bytes);
void deallocate(void* ptr, std::size_t bytes) noexcept;

template <typename T>
struct CountingAllocator {
  using value_type = T;

  CountingAllocator() noexcept = default;
  template <typename U>
  CountingAllocator(const CountingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(memory::allocate(n * sizeof(T))); }
  void deallocate(T* p, std::size_t n) noexcept { memory::deallocate(p, n * sizeof(T)); }

  template <typename U>
  bool operator==(const CountingAllocator<U>&) const noexcept {
    return true;
  }
};

}  // namespace ipst::memory
