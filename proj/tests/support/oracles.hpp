// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

// Reference implementations for the tests: plain nested loops in double
// precision, written independently of the optimized kernels, plus a
// central-difference gradient checker for tape ops.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "ipst/autodiff.hpp"
#include "ipst/tensor.hpp"

namespace ipst::oracle {

inline Tensor4 random_tensor(const Shape& shape, std::mt19937_64& rng, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> dist(lo, hi);
  Tensor4 t(shape);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

/// Values bounded away from zero, so a finite-difference step never
/// crosses the ReLU kink.
inline Tensor4 random_away_from_zero(const Shape& shape, std::mt19937_64& rng, float margin = 0.1f) {
  std::uniform_real_distribution<float> mag(margin, 1.0f);
  std::bernoulli_distribution sign(0.5);
  Tensor4 t(shape);
  for (float& v : t.data()) v = sign(rng) ? mag(rng) : -mag(rng);
  return t;
}

/// A random permutation of evenly spaced values, so every pooling window has
/// a unique maximum separated from the runner-up by `spacing`.
inline Tensor4 random_distinct(const Shape& shape, std::mt19937_64& rng, float spacing = 0.05f) {
  Tensor4 t(shape);
  std::vector<float> values(t.numel());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = spacing * static_cast<float>(i);
  std::shuffle(values.begin(), values.end(), rng);
  std::copy(values.begin(), values.end(), t.data().begin());
  return t;
}

inline Tensor4 conv2d(const Tensor4& in, const Tensor4& w, const Tensor4* bias, std::size_t pad) {
  const Shape& si = in.shape();
  const Shape& sw = w.shape();
  const std::size_t oh = si.h + 2 * pad - sw.h + 1;
  const std::size_t ow = si.w + 2 * pad - sw.w + 1;
  Tensor4 out({si.n, sw.n, oh, ow});
  for (std::size_t n = 0; n < si.n; ++n) {
    for (std::size_t o = 0; o < sw.n; ++o) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
          double acc = bias != nullptr ? (*bias)[o] : 0.0;
          for (std::size_t c = 0; c < si.c; ++c) {
            for (std::size_t ky = 0; ky < sw.h; ++ky) {
              for (std::size_t kx = 0; kx < sw.w; ++kx) {
                const auto iy = static_cast<long>(y + ky) - static_cast<long>(pad);
                const auto ix = static_cast<long>(x + kx) - static_cast<long>(pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(si.h) || ix >= static_cast<long>(si.w)) continue;
                acc += static_cast<double>(in.at(n, c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix))) *
                       static_cast<double>(w.at(o, c, ky, kx));
              }
            }
          }
          out.at(n, o, y, x) = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

inline Tensor4 maxpool2(const Tensor4& in) {
  const Shape& s = in.shape();
  Tensor4 out({s.n, s.c, s.h / 2, s.w / 2});
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t y = 0; y < s.h / 2; ++y) {
        for (std::size_t x = 0; x < s.w / 2; ++x) {
          float m = -std::numeric_limits<float>::infinity();
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) m = std::max(m, in.at(n, c, 2 * y + dy, 2 * x + dx));
          }
          out.at(n, c, y, x) = m;
        }
      }
    }
  }
  return out;
}

/// G[i][j] = sum_p F[i][p] F[j][p] over the flattened spatial positions.
inline Tensor4 gram(const Tensor4& f) {
  const Shape& s = f.shape();
  Tensor4 g({1, 1, s.c, s.c});
  for (std::size_t i = 0; i < s.c; ++i) {
    for (std::size_t j = 0; j < s.c; ++j) {
      double acc = 0.0;
      for (std::size_t y = 0; y < s.h; ++y) {
        for (std::size_t x = 0; x < s.w; ++x) {
          acc += static_cast<double>(f.at(0, i, y, x)) * static_cast<double>(f.at(0, j, y, x));
        }
      }
      g.at(0, 0, i, j) = static_cast<float>(acc);
    }
  }
  return g;
}

/// Half-pixel-centre bilinear interpolation with edge clamping.
inline Tensor4 bilinear(const Tensor4& in, std::size_t oh, std::size_t ow) {
  const Shape& s = in.shape();
  Tensor4 out({s.n, s.c, oh, ow});
  auto source = [](std::size_t d, std::size_t in_size, std::size_t out_size, std::size_t& i0, std::size_t& i1,
                   double& frac) {
    double src = (static_cast<double>(d) + 0.5) * static_cast<double>(in_size) / static_cast<double>(out_size) - 0.5;
    src = std::max(src, 0.0);
    i0 = std::min(static_cast<std::size_t>(std::floor(src)), in_size - 1);
    i1 = std::min(i0 + 1, in_size - 1);
    frac = src - static_cast<double>(i0);
  };
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t y = 0; y < oh; ++y) {
        std::size_t y0, y1;
        double fy;
        source(y, s.h, oh, y0, y1, fy);
        for (std::size_t x = 0; x < ow; ++x) {
          std::size_t x0, x1;
          double fx;
          source(x, s.w, ow, x0, x1, fx);
          const double top = (1 - fx) * in.at(n, c, y0, x0) + fx * in.at(n, c, y0, x1);
          const double bottom = (1 - fx) * in.at(n, c, y1, x0) + fx * in.at(n, c, y1, x1);
          out.at(n, c, y, x) = static_cast<float>((1 - fy) * top + fy * bottom);
        }
      }
    }
  }
  return out;
}

/// max|a - b| / max(max|b|, tiny).
inline double max_relative_error(const Tensor4& a, const Tensor4& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    diff = std::max(diff, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    scale = std::max(scale, std::abs(static_cast<double>(b[i])));
  }
  return diff / std::max(scale, 1e-30);
}

using TapeFn = std::function<ad::Var(ad::Tape&, std::span<const ad::Var>)>;

struct GradCheck {
  /// Norm-wise relative error ||analytic - numeric|| / max(||analytic||, ||numeric||) per input.
  std::vector<double> relative_error;
  double worst() const {
    return relative_error.empty() ? 0.0 : *std::max_element(relative_error.begin(), relative_error.end());
  }
};

/// Checks d(sum r*f(inputs))/d(inputs) against central differences, where
/// r is a random probe of the output's shape. Probe sums accumulate in double.
inline GradCheck check_gradients(const TapeFn& f, std::vector<Tensor4> inputs, std::uint64_t seed,
                                 double eps = 1e-2) {
  std::mt19937_64 rng(seed);
  Tensor4 probe;
  GradCheck result;

  auto evaluate = [&](const std::vector<Tensor4>& values) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& v : values) vars.push_back(tape.leaf(v, false));
    const Tensor4& y = tape.value(f(tape, vars));
    double acc = 0.0;
    for (std::size_t i = 0; i < y.numel(); ++i) acc += static_cast<double>(probe[i]) * static_cast<double>(y[i]);
    return acc;
  };

  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const auto& v : inputs) vars.push_back(tape.leaf(v));
  const ad::Var out = f(tape, vars);
  probe = random_tensor(tape.value(out).shape(), rng);
  tape.backward(out, probe);

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor4* g = tape.grad(vars[k]);
    double diff2 = 0.0, an2 = 0.0, nu2 = 0.0;
    for (std::size_t i = 0; i < inputs[k].numel(); ++i) {
      const float original = inputs[k][i];
      const float hi = original + static_cast<float>(eps);
      const float lo = original - static_cast<float>(eps);
      inputs[k][i] = hi;
      const double plus = evaluate(inputs);
      inputs[k][i] = lo;
      const double minus = evaluate(inputs);
      inputs[k][i] = original;
      // Divide by the step actually taken after float rounding.
      const double numeric = (plus - minus) / (static_cast<double>(hi) - static_cast<double>(lo));
      const double analytic = g != nullptr ? static_cast<double>((*g)[i]) : 0.0;
      diff2 += (analytic - numeric) * (analytic - numeric);
      an2 += analytic * analytic;
      nu2 += numeric * numeric;
    }
    const double denom = std::max(std::sqrt(std::max(an2, nu2)), 1e-12);
    result.relative_error.push_back(std::sqrt(diff2) / denom);
  }
  return result;
}

}  // namespace ipst::oracle
