#pragma once

#include "pixmotion/frame.hpp"

namespace pixmotion {

// Where every source pixel lands in the target view.
struct ReprojectedCoords {
  Grid<Pixel> coords;   // continuous target coordinate per source pixel
  ScalarGrid depth;     // depth in the target camera
  Mask valid;           // source depth valid and in front of the target camera
};

// `target_from_source` maps source-camera coordinates to target-camera
// coordinates (T_target^-1 * T_source for camera-to-world poses).
ReprojectedCoords reproject_coords(const DepthMap& source_depth, const PoseSE3& target_from_source,
                                   const Intrinsics& k);

struct SplatParams {
  // Weight exp(-sharpness * z / median_z): nearer surfaces win.
  double sharpness = 10.0;
  // Target pixels whose accumulated kernel weight is at or below this are holes.
  double coverage_eps = 1e-4;
};

struct SplattedFrame {
  RealImage image;      // normalised colour, zero on holes
  ScalarGrid coverage;  // accumulated bilinear kernel weight
  Mask valid;           // coverage > coverage_eps
};

// Forward-warps `source_image` with a bilinear kernel over the 4 enclosing
// target pixels and depth-softmax blending. Accumulation is sequential so
// results are bit-stable.
SplattedFrame softmax_splat(const ColorImage& source_image, const ReprojectedCoords& coords,
                            const SplatParams& params = {});

// Convenience: reproject + splat a neighbouring RGB-D frame into the current view.
SplattedFrame synthesize_view(const ColorImage& source_image, const DepthMap& source_depth,
                              const PoseSE3& target_from_source, const Intrinsics& k,
                              const SplatParams& params = {});

struct WarpedFrame {
  RealImage image;
  Mask valid;  // sample location fell inside the source image
};

// Inverse warp with bilinear sampling: out(x) = source(H^-1 x), where H maps
// source pixels to target pixels. Throws kDegenerate for singular H.
WarpedFrame homography_warp(const ColorImage& source_image, const Eigen::Matrix3d& homography);

// H = K (R + t n^T / d) K^-1 for the plane n . X = d expressed in the source camera.
Eigen::Matrix3d plane_induced_homography(const Intrinsics& k, const PoseSE3& target_from_source,
                                         const Eigen::Vector3d& plane_normal, double plane_distance);

// Median of the valid depths (0 when there are none).
double median_depth(const DepthMap& depth);

}  // namespace pixmotion
