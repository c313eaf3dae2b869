#include "pixmotion/view_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pixmotion {

ReprojectedCoords reproject_coords(const DepthMap& source_depth, const PoseSE3& target_from_source,
                                   const Intrinsics& k) {
  k.validate();
  if (source_depth.width() != k.width || source_depth.height() != k.height) {
    fail(ErrorKind::kDimensionMismatch, "reproject_coords: depth does not match intrinsics");
  }
  const int w = k.width;
  const int h = k.height;
  ReprojectedCoords out{Grid<Pixel>(w, h, Pixel::Zero()), ScalarGrid(w, h, 0.0), Mask(w, h, 0)};

  const Eigen::Matrix3d& r = target_from_source.rotation();
  const Eigen::Vector3d& t = target_from_source.translation();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!source_depth.is_valid(x, y)) continue;
      const double z = source_depth.values(x, y);
      const Point3 p(((x - k.cx) / k.fx) * z, ((y - k.cy) / k.fy) * z, z);
      const Point3 q = r * p + t;
      if (!(q.z() > 0.0)) continue;
      out.coords(x, y) = Pixel(k.fx * q.x() / q.z() + k.cx, k.fy * q.y() / q.z() + k.cy);
      out.depth(x, y) = q.z();
      out.valid(x, y) = 1;
    }
  }
  return out;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

double median_depth(const DepthMap& depth) {
  std::vector<double> v;
  v.reserve(depth.values.size());
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    if (depth.valid[i]) v.push_back(depth.values[i]);
  }
  return median_of(std::move(v));
}

SplattedFrame softmax_splat(const ColorImage& source_image, const ReprojectedCoords& coords,
                            const SplatParams& params) {
  require_same_shape(source_image, coords.coords, "softmax_splat");
  if (!(params.sharpness >= 0.0)) fail(ErrorKind::kInvalidArgument, "softmax_splat: sharpness must be >= 0");
  const int w = source_image.width();
  const int h = source_image.height();

  std::vector<double> depths;
  depths.reserve(coords.depth.size());
  for (std::size_t i = 0; i < coords.depth.size(); ++i) {
    if (coords.valid[i]) depths.push_back(coords.depth[i]);
  }
  const double z_ref = depths.empty() ? 1.0 : median_of(depths);
  // Softmax weights are shift-invariant; anchoring at the nearest depth keeps
  // every exponent <= 0 so nothing overflows.
  const double z_min = depths.empty() ? 0.0 : *std::min_element(depths.begin(), depths.end());
  const double beta = params.sharpness / z_ref;

  SplattedFrame out{RealImage(w, h, RgbD{0.0, 0.0, 0.0}), ScalarGrid(w, h, 0.0), Mask(w, h, 0)};
  ScalarGrid weight_sum(w, h, 0.0);

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (!coords.valid(sx, sy)) continue;
      const Pixel& p = coords.coords(sx, sy);
      const double fx0 = std::floor(p.x());
      const double fy0 = std::floor(p.y());
      if (fx0 < -1.0 || fy0 < -1.0 || fx0 > w - 1 || fy0 > h - 1) continue;
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const double ax = p.x() - fx0;
      const double ay = p.y() - fy0;
      const double depth_weight = std::exp(-beta * (coords.depth(sx, sy) - z_min));
      const Rgb8 c = source_image(sx, sy);

      const int tx[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ty[4] = {y0, y0, y0 + 1, y0 + 1};
      const double kernel[4] = {(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay), (1.0 - ax) * ay, ax * ay};
      for (int n = 0; n < 4; ++n) {
        if (kernel[n] <= 0.0 || !out.image.contains(tx[n], ty[n])) continue;
        const double wgt = kernel[n] * depth_weight;
        RgbD& acc = out.image(tx[n], ty[n]);
        acc[0] += wgt * c.r;
        acc[1] += wgt * c.g;
        acc[2] += wgt * c.b;
        weight_sum(tx[n], ty[n]) += wgt;
        out.coverage(tx[n], ty[n]) += kernel[n];
      }
    }
  }

  for (std::size_t i = 0; i < out.image.size(); ++i) {
    if (out.coverage[i] > params.coverage_eps && weight_sum[i] > 0.0) {
      out.valid[i] = 1;
      for (double& v : out.image[i]) v /= weight_sum[i];
    } else {
      out.image[i] = {0.0, 0.0, 0.0};
    }
  }
  return out;
}

SplattedFrame synthesize_view(const ColorImage& source_image, const DepthMap& source_depth,
                              const PoseSE3& target_from_source, const Intrinsics& k,
                              const SplatParams& params) {
  return softmax_splat(source_image, reproject_coords(source_depth, target_from_source, k), params);
}

WarpedFrame homography_warp(const ColorImage& source_image, const Eigen::Matrix3d& homography) {
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(homography);
  if (!lu.isInvertible()) fail(ErrorKind::kDegenerate, "homography_warp: singular homography");
  const Eigen::Matrix3d inv = lu.inverse();

  const int w = source_image.width();
  const int h = source_image.height();
  WarpedFrame out{RealImage(w, h, RgbD{0.0, 0.0, 0.0}), Mask(w, h, 0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d s = inv * Eigen::Vector3d(x, y, 1.0);
      if (!(std::abs(s.z()) > 0.0)) continue;
      const double u = s.x() / s.z();
      const double v = s.y() / s.z();
      if (!(u >= 0.0 && v >= 0.0 && u <= w - 1 && v <= h - 1)) continue;
      const int x0 = std::min(static_cast<int>(u), w - 1);
      const int y0 = std::min(static_cast<int>(v), h - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double ax = u - x0;
      const double ay = v - y0;
      RgbD& dst = out.image(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - ax) * source_image(x0, y0)[c] + ax * source_image(x1, y0)[c];
        const double bottom = (1.0 - ax) * source_image(x0, y1)[c] + ax * source_image(x1, y1)[c];
        dst[c] = (1.0 - ay) * top + ay * bottom;
      }
      out.valid(x, y) = 1;
    }
  }
  return out;
}

Eigen::Matrix3d plane_induced_homography(const Intrinsics& k, const PoseSE3& target_from_source,
                                         const Eigen::Vector3d& plane_normal, double plane_distance) {
  if (!(std::abs(plane_distance) > 0.0)) {
    fail(ErrorKind::kDegenerate, "plane_induced_homography: plane passes through the camera centre");
  }
  const Eigen::Matrix3d km = k.matrix();
  const Eigen::Matrix3d a = target_from_source.rotation() +
                            target_from_source.translation() * plane_normal.transpose() / plane_distance;
  return km * a * km.inverse();
}

}  // namespace pixmotion
