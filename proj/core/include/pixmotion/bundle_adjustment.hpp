#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "pixmotion/map_points.hpp"

namespace pixmotion {

// Probability-weighted bundle adjustment: minimise
//   1/2 * sum_i w_i * || x_i - pi(R X_i + t) ||^2,   w_i = 1 - P(k_i),
// with every w_i held fixed for the whole solve.

struct BAPose {
  PoseSE3 world_to_camera;
  bool fixed = false;
};

struct BAPoint {
  TrackedPoint point;  // world position, motion probability and weight
  bool fixed = false;
};

struct Observation {
  std::size_t pose = 0;
  std::size_t point = 0;
  Pixel measured = Pixel::Zero();
};

struct BAProblem {
  Intrinsics intrinsics;
  std::vector<BAPose> poses;
  std::vector<BAPoint> points;
  std::vector<Observation> observations;

  // Throws kInvalidArgument on dangling observation indices or when nothing is free.
  void validate() const;
  [[nodiscard]] std::size_t free_parameter_count() const;
};

// measured - projected for one observation.
Eigen::Vector2d reprojection_residual(const Pixel& measured, const PoseSE3& world_to_camera,
                                      const Point3& world, const Intrinsics& k);

struct ObservationJacobian {
  // d residual / d xi for the left-multiplied increment exp(xi) * T, with
  // xi = (omega, v).
  Eigen::Matrix<double, 2, 6> pose;
  // d residual / d X (world coordinates).
  Eigen::Matrix<double, 2, 3> point;
};

// Throws kBehindCamera when the point is not in front of the camera.
ObservationJacobian analytic_jacobian(const PoseSE3& world_to_camera, const Point3& world, const Intrinsics& k);

struct ResidualSet {
  Eigen::VectorXd residuals;        // 2 entries per used observation
  Eigen::VectorXd weights;          // one per used observation
  std::vector<std::size_t> used;    // observation indices, in order
  std::vector<std::size_t> excluded;  // behind-camera observations
};

ResidualSet weighted_ba_residuals(const BAProblem& problem);

// 1/2 * sum w_i ||r_i||^2 over observations in front of the camera.
double weighted_cost(const BAProblem& problem);

struct SolverConfig {
  int max_iterations = 100;
  double initial_damping = 1e-4;
  double damping_increase = 10.0;
  double damping_decrease = 10.0;
  double max_damping = 1e12;
  double relative_cost_tol = 1e-10;
  double update_tol = 1e-12;
};

struct SolveReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t excluded_observations = 0;
  std::vector<double> cost_history;  // accepted costs, starting with the initial one
};

struct BAResult {
  BAProblem problem;  // optimised copy; weights and probabilities untouched
  SolveReport report;
};

// Damped Gauss-Newton (additive Levenberg damping). Observations with zero
// weight are skipped outright, so they have no influence at all. Throws
// kDegenerate when the undamped normal equations are rank deficient.
BAResult solve_weighted_ba(const BAProblem& problem, const SolverConfig& config = {});

// Line-oriented text format:
//   BA <poses> <points> <observations>
//   CAMERA fx fy cx cy width height
//   POSE idx fixed qw qx qy qz tx ty tz      (world-to-camera)
//   POINT idx fixed x y z prob
//   OBS pose_idx point_idx u v
// '#' starts a comment line.
BAProblem read_ba_problem(std::istream& in);
BAProblem read_ba_problem(const std::filesystem::path& path);
void write_ba_problem(std::ostream& out, const BAProblem& problem);
void write_ba_problem(const std::filesystem::path& path, const BAProblem& problem);

}  // namespace pixmotion
