// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the ipst Project.

#include "ipst/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace ipst {
namespace {

unsigned char to_byte(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<unsigned char>(std::lround(clamped * 255.0f));
}

}  // namespace

Tensor4 load_image(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ImageIoError("cannot read image " + path.string() + ": no such file");
  }
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw ImageIoError("cannot decode image " + path.string());
  const auto h = static_cast<std::size_t>(bgr.rows);
  const auto w = static_cast<std::size_t>(bgr.cols);
  Tensor4 out({1, 3, h, w});
  float* planes[3] = {out.plane(0, 0), out.plane(0, 1), out.plane(0, 2)};
  for (std::size_t y = 0; y < h; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      planes[0][i] = static_cast<float>(row[x][2]) / 255.0f;
      planes[1][i] = static_cast<float>(row[x][1]) / 255.0f;
      planes[2][i] = static_cast<float>(row[x][0]) / 255.0f;
    }
  }
  return out;
}

void save_image(const Tensor4& image, const std::filesystem::path& path) {
  const Shape& s = image.shape();
  if (s.n != 1 || s.c != 3) {
    throw ImageIoError("save_image: expected (1,3,h,w), got " + s.to_string());
  }
  cv::Mat bgr(static_cast<int>(s.h), static_cast<int>(s.w), CV_8UC3);
  const float* planes[3] = {image.plane(0, 0), image.plane(0, 1), image.plane(0, 2)};
  for (std::size_t y = 0; y < s.h; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
    for (std::size_t x = 0; x < s.w; ++x) {
      const std::size_t i = y * s.w + x;
      row[x] = cv::Vec3b(to_byte(planes[2][i]), to_byte(planes[1][i]), to_byte(planes[0][i]));
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw ImageIoError("cannot write image " + path.string() + ": " + e.what());
  }
  if (!ok) throw ImageIoError("cannot write image " + path.string());
}

Tensor4 quantize_8bit(const Tensor4& image) {
  Tensor4 out(image.shape());
  for (std::size_t i = 0; i < image.numel(); ++i) out[i] = static_cast<float>(to_byte(image[i])) / 255.0f;
  return out;
}

bool is_image_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace ipst
