// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace ipst {
namespace {

using Rgb = std::array<double, 3>;

Rgb hsv(double hue, double sat, double val) {
  hue = std::fmod(hue, 1.0) * 6.0;
  const int sector = static_cast<int>(hue) % 6;
  const double f = hue - std::floor(hue);
  const double p = val * (1 - sat);
  const double q = val * (1 - sat * f);
  const double t = val * (1 - sat * (1 - f));
  switch (sector) {
    case 0: return {val, t, p};
    case 1: return {q, val, p};
    case 2: return {p, val, t};
    case 3: return {p, q, val};
    case 4: return {t, p, val};
    default: return {val, p, q};
  }
}

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

// Smooth lattice noise on a 64x64 grid in normalized coordinates.
class ValueNoise {
 public:
  explicit ValueNoise(std::mt19937_64& rng) : grid_(kSize * kSize) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : grid_) v = u(rng);
  }

  double operator()(double x, double y, double frequency) const {
    const double gx = x * frequency;
    const double gy = y * frequency;
    const auto x0 = static_cast<long>(std::floor(gx));
    const auto y0 = static_cast<long>(std::floor(gy));
    const double fx = smooth(gx - static_cast<double>(x0));
    const double fy = smooth(gy - static_cast<double>(y0));
    const double top = lerp(at(x0, y0), at(x0 + 1, y0), fx);
    const double bottom = lerp(at(x0, y0 + 1), at(x0 + 1, y0 + 1), fx);
    return lerp(top, bottom, fy);
  }

 private:
  static constexpr long kSize = 64;
  static double smooth(double t) { return t * t * (3 - 2 * t); }
  static double lerp(double a, double b, double t) { return a + (b - a) * t; }
  double at(long x, long y) const {
    x = ((x % kSize) + kSize) % kSize;
    y = ((y % kSize) + kSize) % kSize;
    return grid_[static_cast<std::size_t>(y * kSize + x)];
  }
  std::vector<double> grid_;
};

struct Blob {
  double cx, cy, rx, ry;
  Rgb color;
};

}  // namespace

Tensor4 make_test_scene(std::size_t height, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 17);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const double base_hue = u(rng);
  const Rgb sky_top = hsv(base_hue + 0.55, 0.55, 0.85);
  const Rgb sky_low = hsv(base_hue + 0.08, 0.35, 0.95);
  const Rgb ground_near = hsv(base_hue + 0.30, 0.60, 0.35);
  const Rgb ground_far = hsv(base_hue + 0.22, 0.45, 0.60);
  const Rgb sun = hsv(base_hue + 0.12, 0.25, 1.0);
  const double horizon = 0.45 + 0.15 * u(rng);
  const double hill_phase = 6.28 * u(rng);
  const double sun_x = 0.15 + 0.7 * u(rng);
  const double sun_y = horizon * (0.3 + 0.4 * u(rng));

  std::vector<Blob> blobs(7);
  for (auto& b : blobs) {
    b.cx = u(rng);
    b.cy = horizon + (1.0 - horizon) * u(rng);
    b.rx = 0.03 + 0.08 * u(rng);
    b.ry = 0.03 + 0.10 * u(rng);
    b.color = hsv(base_hue + u(rng), 0.3 + 0.6 * u(rng), 0.2 + 0.7 * u(rng));
  }
  const ValueNoise noise(rng);

  Tensor4 out({1, 3, height, width});
  const double aspect = static_cast<double>(width) / static_cast<double>(height);
  for (std::size_t py = 0; py < height; ++py) {
    const double y = (static_cast<double>(py) + 0.5) / static_cast<double>(height);
    for (std::size_t px = 0; px < width; ++px) {
      const double x = (static_cast<double>(px) + 0.5) / static_cast<double>(width);
      const double ridge = horizon + 0.05 * std::sin(7.0 * x + hill_phase) + 0.03 * std::sin(17.0 * x);
      Rgb c;
      if (y < ridge) {
        c = mix(sky_top, sky_low, std::clamp(y / ridge, 0.0, 1.0));
        const double dx = (x - sun_x) * aspect;
        const double dy = y - sun_y;
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d < 0.07) c = sun;
        else if (d < 0.12) c = mix(sun, c, (d - 0.07) / 0.05);
      } else {
        c = mix(ground_far, ground_near, std::clamp((y - ridge) / (1.0 - ridge), 0.0, 1.0));
        for (const Blob& b : blobs) {
          const double ex = (x - b.cx) / b.rx;
          const double ey = (y - b.cy) / b.ry;
          if (ex * ex + ey * ey < 1.0) c = b.color;
        }
      }
      const double grain = 0.06 * noise(x, y, 24.0) + 0.03 * noise(x, y, 96.0 / 1.5);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        out.at(0, ch, py, px) = static_cast<float>(std::clamp(c[ch] + grain, 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace ipst
