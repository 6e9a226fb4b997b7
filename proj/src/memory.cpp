// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/memory.hpp"

#include <atomic>
#include <cstdlib>

namespace ipst::memory {
namespace {

std::atomic<std::size_t> g_current{0};
std::atomic<std::size_t> g_peak{0};
std::atomic<std::size_t> g_limit{0};

constexpr std::size_t kAlignment = 64;

void raise_peak(std::size_t value) noexcept {
  std::size_t peak = g_peak.load(std::memory_order_relaxed);
  while (value > peak && !g_peak.compare_exchange_weak(peak, value, std::memory_order_relaxed)) {
  }
}

}  // namespace

std::size_t current_bytes() noexcept { return g_current.load(std::memory_order_relaxed); }
std::size_t peak_bytes() noexcept { return g_peak.load(std::memory_order_relaxed); }
void reset_peak() noexcept { g_peak.store(current_bytes(), std::memory_order_relaxed); }
void set_limit(std::size_t bytes) noexcept { g_limit.store(bytes, std::memory_order_relaxed); }
std::size_t limit() noexcept { return g_limit.load(std::memory_order_relaxed); }

void* allocate(std::size_t bytes) {
  if (bytes == 0) bytes = 1;
  const std::size_t after = g_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  const std::size_t cap = limit();
  if (cap != 0 && after > cap) {
    g_current.fetch_sub(bytes, std::memory_order_relaxed);
    throw std::bad_alloc();
  }
  const std::size_t rounded = (bytes + kAlignment - 1) / kAlignment * kAlignment;
  void* ptr = std::aligned_alloc(kAlignment, rounded);
  if (ptr == nullptr) {
    g_current.fetch_sub(bytes, std::memory_order_relaxed);
    throw std::bad_alloc();
  }
  raise_peak(after);
  return ptr;
}

void deallocate(void* ptr, std::size_t bytes) noexcept {
  if (ptr == nullptr) return;
  if (bytes == 0) bytes = 1;
  std::free(ptr);
  g_current.fetch_sub(bytes, std::memory_order_relaxed);
}

}  // namespace ipst::memory
