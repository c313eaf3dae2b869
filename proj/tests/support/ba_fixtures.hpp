#pragma once

#include <random>

#include "pixmotion/bundle_adjustment.hpp"
#include "test_support.hpp"

namespace pixmotion::testing {

inline Intrinsics ba_camera() { return {500.0, 500.0, 320.0, 240.0, 640, 480}; }

// Rotation angle plus translation distance between two poses.
inline double pose_error(const PoseSE3& a, const PoseSE3& b) {
  const PoseSE3 d = a * b.inverse();
  return so3_log(d.rotation()).norm() + d.translation().norm();
}

struct PoseOnlyCase {
  BAProblem problem;  // single free pose, fixed points, perturbed start
  PoseSE3 truth;
};

// `n` fixed points seen by one free camera. The first `outliers` observations
// are corrupted by `outlier_px` and carry motion probability `outlier_prob`.
inline PoseOnlyCase make_pose_only_case(std::mt19937_64& rng, int n = 100, int outliers = 0,
                                        double outlier_px = 20.0, double outlier_prob = 1.0) {
  const Intrinsics k = ba_camera();
  std::uniform_real_distribution<double> u(20.0, 620.0);
  std::uniform_real_distribution<double> v(20.0, 460.0);
  std::uniform_real_distribution<double> d(2.0, 8.0);
  std::normal_distribution<double> g(0.0, 1.0);

  PoseOnlyCase c;
  c.truth = PoseSE3(random_rotation(rng, 0.3), {0.2, -0.1, 0.3});
  c.problem.intrinsics = k;

  const PoseSE3 camera_to_world = c.truth.inverse();
  for (int i = 0; i < n; ++i) {
    const Pixel px(u(rng), v(rng));
    const Point3 world = camera_to_world * backproject(px, d(rng), k);
    Pixel measured = px;
    double prob = 0.0;
    if (i < outliers) {
      Eigen::Vector2d dir(g(rng), g(rng));
      measured += outlier_px * dir.normalized();
      prob = outlier_prob;
    }
    c.problem.points.push_back({TrackedPoint(i, measured, world, prob), true});
    c.problem.observations.push_back({0, static_cast<std::size_t>(i), measured});
  }

  // 5 degree / 0.1 m perturbation of the start.
  Eigen::Vector3d axis(g(rng), g(rng), g(rng));
  Eigen::Vector3d shift(g(rng), g(rng), g(rng));
  const PoseSE3 delta(Eigen::AngleAxisd(5.0 * 3.14159265358979323846 / 180.0, axis.normalized()).toRotationMatrix(),
                      0.1 * shift.normalized());
  c.problem.poses.push_back({delta * c.truth, false});
  return c;
}

}  // namespace pixmotion::testing
