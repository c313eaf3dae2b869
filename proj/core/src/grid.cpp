#include "pixmotion/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pixmotion {

ScalarGrid to_gray(const ColorImage& image) {
  ScalarGrid gray(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const Rgb8& c = image[i];
    gray[i] = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
  }
  return gray;
}

ColorImage to_color_image(const RealImage& image, const Mask* valid) {
  if (valid) require_same_shape(image, *valid, "to_color_image");
  ColorImage out(image.width(), image.height());
  auto quantize = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  };
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (valid && !(*valid)[i]) continue;
    out[i] = {quantize(image[i][0]), quantize(image[i][1]), quantize(image[i][2])};
  }
  return out;
}

RealImage to_real_image(const ColorImage& image) {
  RealImage out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    out[i] = {double(image[i].r), double(image[i].g), double(image[i].b)};
  }
  return out;
}

namespace {

template <typename F>
void for_each_masked(const RealImage& a, const RealImage& b, const Mask* mask, F&& f) {
  require_same_shape(a, b, "image comparison");
  if (mask) require_same_shape(a, *mask, "image comparison mask");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    f(a[i], b[i]);
  }
}

}  // namespace

double mean_abs_difference(const RealImage& a, const RealImage& b, const Mask* mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for_each_masked(a, b, mask, [&](const RgbD& p, const RgbD& q) {
    for (int c = 0; c < 3; ++c) sum += std::abs(p[c] - q[c]);
    n += 3;
  });
  return n ? sum / static_cast<double>(n) : 0.0;
}

double psnr(const RealImage& a, const RealImage& b, const Mask* mask) {
  double sq = 0.0;
  std::size_t n = 0;
  for_each_masked(a, b, mask, [&](const RgbD& p, const RgbD& q) {
    for (int c = 0; c < 3; ++c) sq += (p[c] - q[c]) * (p[c] - q[c]);
    n += 3;
  });
  if (n == 0 || sq == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sq / static_cast<double>(n);
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace pixmotion
