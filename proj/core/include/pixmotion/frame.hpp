#pragma once

#include <optional>

#include "pixmotion/geometry.hpp"
#include "pixmotion/grid.hpp"

namespace pixmotion {

// Metric depth with an explicit validity mask; invalid pixels carry no depth.
struct DepthMap {
  ScalarGrid values;
  Mask valid;

  DepthMap() = default;
  DepthMap(int width, int height) : values(width, height, 0.0), valid(width, height, 0) {}

  [[nodiscard]] int width() const noexcept { return values.width(); }
  [[nodiscard]] int height() const noexcept { return values.height(); }
  [[nodiscard]] bool is_valid(int x, int y) const { return valid(x, y) != 0; }

  void set(int x, int y, double depth);
  void invalidate(int x, int y) {
    values(x, y) = 0.0;
    valid(x, y) = 0;
  }

  // Throws unless every valid value is finite and positive and the grids agree.
  void validate() const;

  bool operator==(const DepthMap&) const = default;
};

// Per-pixel probability in [0,1] with a validity mask.
struct ProbabilityMap {
  ScalarGrid values;
  Mask valid;

  ProbabilityMap() = default;
  ProbabilityMap(int width, int height) : values(width, height, 0.0), valid(width, height, 1) {}

  [[nodiscard]] int width() const noexcept { return values.width(); }
  [[nodiscard]] int height() const noexcept { return values.height(); }

  bool operator==(const ProbabilityMap&) const = default;
};

// One timestamped RGB-D observation, its static-background counterpart and
// (optionally) the camera-to-world ground-truth pose.
struct FrameBundle {
  double timestamp = 0.0;
  ColorImage rgb;
  DepthMap depth;
  ColorImage background_rgb;
  std::optional<DepthMap> background_depth;
  std::optional<PoseSE3> pose;

  // Depth used when synthesising the background view; falls back to the
  // dynamic depth when no background depth was supplied.
  [[nodiscard]] const DepthMap& depth_for_background() const {
    return background_depth ? *background_depth : depth;
  }

  // Throws kDimensionMismatch if any member disagrees with `k`'s image size.
  void validate(const Intrinsics& k) const;
};

}  // namespace pixmotion
