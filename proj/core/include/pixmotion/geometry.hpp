#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "pixmotion/error.hpp"

namespace pixmotion {

using Point3 = Eigen::Vector3d;
using Pixel = Eigen::Vector2d;
using Vector6 = Eigen::Matrix<double, 6, 1>;

// Pinhole camera. Integer pixel (u, v) samples the continuous image point
// (u, v) exactly; there is no half-pixel offset anywhere in the library.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws kInvalidArgument unless fx, fy > 0 and the principal point lies
  // inside the image.
  void validate() const;

  [[nodiscard]] Eigen::Matrix3d matrix() const;
  [[nodiscard]] bool contains(const Pixel& px) const;

  bool operator==(const Intrinsics&) const = default;
};

// Published calibration for the TUM RGB-D freiburg3 sequences.
Intrinsics tum_fr3_intrinsics();

// Rigid transform p -> R p + t.
class PoseSE3 {
 public:
  PoseSE3() = default;
  PoseSE3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static PoseSE3 identity() { return {}; }
  // Quaternion is normalised before use.
  static PoseSE3 from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

  [[nodiscard]] const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  [[nodiscard]] const Eigen::Vector3d& translation() const noexcept { return translation_; }
  [[nodiscard]] Eigen::Quaterniond quaternion() const;

  [[nodiscard]] Point3 operator*(const Point3& p) const { return rotation_ * p + translation_; }
  [[nodiscard]] PoseSE3 operator*(const PoseSE3& other) const;
  [[nodiscard]] PoseSE3 inverse() const;

  [[nodiscard]] bool is_approx(const PoseSE3& other, double tol = 1e-9) const;

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

Point3 transform(const PoseSE3& pose, const Point3& p);

// K^-1 [u v 1]^T * depth. Throws kInvalidDepth for depth <= 0 (or non-finite)
// and kInvalidArgument for pixels outside the image.
Point3 backproject(const Pixel& px, double depth, const Intrinsics& k);

// Perspective projection. Throws kBehindCamera when p.z <= 0.
Pixel project(const Point3& p, const Intrinsics& k);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega);
Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation);

// Tangent vector layout: (omega_x, omega_y, omega_z, v_x, v_y, v_z).
PoseSE3 se3_exp(const Vector6& xi);
Vector6 se3_log(const PoseSE3& pose);

}  // namespace pixmotion
