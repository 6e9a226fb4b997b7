// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

// Randomized check cases shared by the unit tests and the acceptance
// binary: one finite-difference case per autodiff op and one naive-loop
// comparison per optimized kernel, all with dimensions <= 8.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "ipst/kernels.hpp"
#include "ipst/norm_constants.hpp"
#include "support/oracles.hpp"

namespace ipst::cases {

struct GradCase {
  std::string name;
  oracle::TapeFn fn;
  std::vector<Tensor4> inputs;
  double eps = 1e-2;
};

inline std::size_t small_dim(std::mt19937_64& rng, std::size_t lo = 1, std::size_t hi = 8) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::vector<GradCase> gradient_cases(std::uint64_t seed) {
  using oracle::random_tensor;
  std::mt19937_64 rng(seed);
  std::vector<GradCase> out;

  for (const std::size_t k : {1u, 3u}) {
    for (const std::size_t pad : {0u, 1u}) {
      const Shape in{1, small_dim(rng), small_dim(rng, 3), small_dim(rng, 3)};
      const std::size_t oc = small_dim(rng);
      out.push_back({"conv2d k" + std::to_string(k) + " pad" + std::to_string(pad),
                     [pad](ad::Tape& t, std::span<const ad::Var> v) { return ad::conv2d(t, v[0], v[1], v[2], pad); },
                     {random_tensor(in, rng), random_tensor({oc, in.c, k, k}, rng), random_tensor({1, oc, 1, 1}, rng)}});
    }
  }
  out.push_back({"relu", [](ad::Tape& t, std::span<const ad::Var> v) { return ad::relu(t, v[0]); },
                 {oracle::random_away_from_zero({1, small_dim(rng), small_dim(rng), small_dim(rng)}, rng)}});
  out.push_back({"maxpool2", [](ad::Tape& t, std::span<const ad::Var> v) { return ad::maxpool2(t, v[0]); },
                 {oracle::random_distinct({1, small_dim(rng), 2 * small_dim(rng, 1, 4), 2 * small_dim(rng, 1, 4)}, rng)}});
  {
    const Shape s{1, small_dim(rng), small_dim(rng), small_dim(rng)};
    for (const auto& [oh, ow] : {std::pair{small_dim(rng), small_dim(rng)}, std::pair{2 * s.h + 1, s.w + 3}}) {
      out.push_back({"bilinear_resize " + s.to_string() + "->" + std::to_string(oh) + "x" + std::to_string(ow),
                     [oh, ow](ad::Tape& t, std::span<const ad::Var> v) { return ad::bilinear_resize(t, v[0], oh, ow); },
                     {random_tensor(s, rng)}});
    }
  }
  out.push_back({"gram", [](ad::Tape& t, std::span<const ad::Var> v) { return ad::gram(t, v[0]); },
                 {random_tensor({1, small_dim(rng), small_dim(rng), small_dim(rng)}, rng)}});
  {
    const Shape s{1, small_dim(rng), small_dim(rng), small_dim(rng)};
    out.push_back({"add/sub/mul_scalar",
                   [](ad::Tape& t, std::span<const ad::Var> v) {
                     return ad::sub(t, ad::add(t, v[0], ad::mul_scalar(t, v[1], 2.5f)), ad::mul_scalar(t, v[0], -0.75f));
                   },
                   {random_tensor(s, rng), random_tensor(s, rng)}});
  }
  out.push_back({"channel_standardize/channelwise_affine",
                 [](ad::Tape& t, std::span<const ad::Var> v) {
                   const ad::Var z = ad::channel_standardize(t, v[0], kImageNet.mean, kImageNet.stddev);
                   return ad::channelwise_affine(t, z, std::array<float, 3>{1.5f, -0.5f, 2.0f},
                                                 std::array<float, 3>{0.1f, 0.2f, 0.3f});
                 },
                 {random_tensor({1, 3, small_dim(rng), small_dim(rng)}, rng)}});
  {
    const Shape s{1, 3, small_dim(rng), small_dim(rng)};
    out.push_back({"channelwise_affine_sum",
                   [](ad::Tape& t, std::span<const ad::Var> v) {
                     return ad::channelwise_affine_sum(t, v[0], v[1], std::array<float, 3>{1.5f, -0.5f, 2.0f},
                                                       std::array<float, 3>{0.1f, 0.2f, 0.3f});
                   },
                   {random_tensor(s, rng), random_tensor(s, rng)}});
  }
  out.push_back({"sum_of_squares", [](ad::Tape& t, std::span<const ad::Var> v) { return ad::sum_of_squares(t, v[0]); },
                 {random_tensor({1, small_dim(rng), small_dim(rng), small_dim(rng)}, rng)}});
  {
    // One style-loss block: conv -> resize -> gram -> squared distance.
    const Shape in{1, small_dim(rng, 1, 4), 2 * small_dim(rng, 1, 4), 2 * small_dim(rng, 1, 4)};
    const std::size_t c = small_dim(rng, 1, 6);
    const auto target = std::make_shared<const Tensor4>(random_tensor({1, 1, c, c}, rng));
    out.push_back({"style block composite",
                   [in, target](ad::Tape& t, std::span<const ad::Var> v) {
                     const ad::Var f = ad::conv2d(t, v[0], v[1], std::nullopt, 1);
                     const ad::Var g = ad::gram(t, ad::bilinear_resize(t, f, in.h / 2 + 1, in.w / 2 + 1));
                     return ad::mul_scalar(t, ad::sum_of_squares(t, ad::sub(t, g, t.constant(target))), 0.25f);
                   },
                   {random_tensor(in, rng, -0.5f, 0.5f), random_tensor({c, in.c, 3, 3}, rng, -0.5f, 0.5f)},
                   1e-3});
  }
  return out;
}

struct OracleCase {
  std::string name;
  Tensor4 got;
  Tensor4 want;
};

inline std::vector<OracleCase> oracle_cases(std::uint64_t seed) {
  using oracle::random_tensor;
  std::mt19937_64 rng(seed);
  std::vector<OracleCase> out;
  for (const std::size_t k : {1u, 3u}) {
    for (const std::size_t pad : {0u, 1u}) {
      const Shape in{1, small_dim(rng), small_dim(rng) + 2, small_dim(rng) + 2};
      const Shape ws{small_dim(rng), in.c, k, k};
      const Tensor4 x = random_tensor(in, rng);
      const Tensor4 w = random_tensor(ws, rng);
      const Tensor4 b = random_tensor({1, ws.n, 1, 1}, rng);
      out.push_back({"conv2d k" + std::to_string(k) + " pad" + std::to_string(pad), kernels::conv2d(x, w, &b, pad),
                     oracle::conv2d(x, w, &b, pad)});
    }
  }
  {
    // Spans several column strips of the convolution.
    const Tensor4 x = random_tensor({1, 3, 70, 90}, rng);
    const Tensor4 w = random_tensor({4, 3, 3, 3}, rng);
    out.push_back({"conv2d wide", kernels::conv2d(x, w, nullptr, 1), oracle::conv2d(x, w, nullptr, 1)});
  }
  {
    const Tensor4 x = random_tensor({1, small_dim(rng), 2 * small_dim(rng), 2 * small_dim(rng)}, rng);
    out.push_back({"maxpool2", kernels::maxpool2(x).output, oracle::maxpool2(x)});
  }
  {
    const Tensor4 f = random_tensor({1, small_dim(rng), small_dim(rng), small_dim(rng)}, rng);
    out.push_back({"gram", kernels::gram(f), oracle::gram(f)});
  }
  {
    const Tensor4 x = random_tensor({1, small_dim(rng), small_dim(rng), small_dim(rng)}, rng);
    const std::size_t oh = small_dim(rng, 1, 17), ow = small_dim(rng, 1, 17);
    out.push_back({"bilinear " + x.shape().to_string() + "->" + std::to_string(oh) + "x" + std::to_string(ow),
                   kernels::bilinear_resize(x, oh, ow), oracle::bilinear(x, oh, ow)});
  }
  return out;
}

}  // namespace ipst::cases
