#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pixmotion/error.hpp"

namespace pixmotion {

// Dense row-major H×W grid. Element (x, y) lives at index y * width + x.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, const T& fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(checked(width) * checked(height)), fill) {}

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int x, int y) const {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] std::span<T> values() noexcept { return data_; }
  [[nodiscard]] std::span<const T> values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  template <typename U>
  [[nodiscard]] bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  static long checked(int n) {
    if (n < 0) fail(ErrorKind::kInvalidArgument, "grid dimension must be non-negative");
    return n;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  [[nodiscard]] std::uint8_t operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
  bool operator==(const Rgb8&) const = default;
};

using RgbD = std::array<double, 3>;

using ColorImage = Grid<Rgb8>;     // 8-bit RGB frame
using RealImage = Grid<RgbD>;      // real-valued RGB (synthesis output)
using ScalarGrid = Grid<double>;
using Mask = Grid<std::uint8_t>;   // 0 = invalid, 1 = valid

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::kDimensionMismatch,
         std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
             std::to_string(b.height()) + ")");
  }
}

// Luma in [0,255] (BT.601 weights), used by the flow estimator.
ScalarGrid to_gray(const ColorImage& image);

// Rounds and clamps each channel to [0,255]; pixels outside `valid` become black.
ColorImage to_color_image(const RealImage& image, const Mask* valid = nullptr);

RealImage to_real_image(const ColorImage& image);

// Mean absolute per-channel difference over pixels where `mask` is set
// (all pixels when `mask` is null). Returns 0 for an empty selection.
double mean_abs_difference(const RealImage& a, const RealImage& b, const Mask* mask = nullptr);

// PSNR in dB over the masked pixels, peak 255. Identical inputs give +inf.
double psnr(const RealImage& a, const RealImage& b, const Mask* mask = nullptr);

}  // namespace pixmotion
