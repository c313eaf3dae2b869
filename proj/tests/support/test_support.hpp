#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "pixmotion/frame.hpp"

namespace pixmotion::testing {

inline ColorImage random_image(int w, int h, std::mt19937_64& rng, int lo = 0, int hi = 255) {
  std::uniform_int_distribution<int> d(lo, hi);
  ColorImage img(w, h);
  for (Rgb8& p : img) {
    p = {static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng))};
  }
  return img;
}

// Smooth band-limited pattern; good for flow and splatting tests.
inline ColorImage smooth_texture(int w, int h, double shift_x = 0.0, double shift_y = 0.0) {
  ColorImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = x - shift_x;
      const double v = y - shift_y;
      const double a = 128 + 60 * std::sin(u * 0.31) * std::cos(v * 0.23) + 40 * std::sin((u + 2 * v) * 0.11);
      const double b = 128 + 70 * std::cos(u * 0.17 - v * 0.29);
      const double c = 128 + 50 * std::sin(u * 0.07 + v * 0.13) + 30 * std::cos(u * 0.41);
      auto q = [](double t) { return static_cast<std::uint8_t>(std::clamp(std::lround(t), 0L, 255L)); };
      img(x, y) = {q(a), q(b), q(c)};
    }
  }
  return img;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(-max_angle, max_angle);
  Eigen::Vector3d axis(n(rng), n(rng), n(rng));
  axis.normalize();
  return Eigen::AngleAxisd(a(rng), axis).toRotationMatrix();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pixmotion_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pixmotion::testing
