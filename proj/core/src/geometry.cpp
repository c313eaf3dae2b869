#include "pixmotion/geometry.hpp"

#include <cmath>
#include <sstream>

namespace pixmotion {

void Intrinsics::validate() const {
  std::ostringstream why;
  if (!(fx > 0.0) || !(fy > 0.0)) why << "focal lengths must be positive";
  else if (width <= 0 || height <= 0) why << "image size must be positive";
  else if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
    why << "principal point (" << cx << ", " << cy << ") outside " << width << "x" << height;
  if (!why.str().empty()) fail(ErrorKind::kInvalidArgument, "intrinsics: " + why.str());
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

bool Intrinsics::contains(const Pixel& px) const {
  return px.x() >= 0.0 && px.y() >= 0.0 && px.x() <= width - 1 && px.y() <= height - 1;
}

Intrinsics tum_fr3_intrinsics() { return {535.4, 539.2, 320.1, 247.6, 640, 480}; }

PoseSE3::PoseSE3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {}

PoseSE3 PoseSE3::from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
  if (!(q.norm() > 0.0)) fail(ErrorKind::kInvalidArgument, "zero quaternion");
  return {q.normalized().toRotationMatrix(), t};
}

Eigen::Quaterniond PoseSE3::quaternion() const {
  Eigen::Quaterniond q(rotation_);
  q.normalize();
  // Canonical hemisphere so serialisation is stable.
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

PoseSE3 PoseSE3::operator*(const PoseSE3& other) const {
  return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
}

PoseSE3 PoseSE3::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

bool PoseSE3::is_approx(const PoseSE3& other, double tol) const {
  return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

Point3 transform(const PoseSE3& pose, const Point3& p) { return pose * p; }

Point3 backproject(const Pixel& px, double depth, const Intrinsics& k) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    fail(ErrorKind::kInvalidDepth, "backproject: depth must be positive and finite");
  }
  if (!k.contains(px)) fail(ErrorKind::kInvalidArgument, "backproject: pixel outside image");
  return {(px.x() - k.cx) / k.fx * depth, (px.y() - k.cy) / k.fy * depth, depth};
}

Pixel project(const Point3& p, const Intrinsics& k) {
  if (!(p.z() > 0.0)) fail(ErrorKind::kBehindCamera, "project: point behind camera");
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  // clang-format off
  s <<  0.0,   -v.z(),  v.y(),
        v.z(),  0.0,   -v.x(),
       -v.y(),  v.x(),  0.0;
  // clang-format on
  return s;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  if (theta == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(theta, omega / theta).toRotationMatrix();
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(Eigen::Quaterniond(rotation).normalized());
  return aa.angle() * aa.axis();
}

namespace {

// Left Jacobian of SO(3); maps the translational tangent to t.
Eigen::Matrix3d left_jacobian(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  double a;
  double b;
  if (theta < 1e-5) {
    const double t2 = theta * theta;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    const double half = std::sin(0.5 * theta);
    a = 2.0 * half * half / (theta * theta);
    b = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Eigen::Matrix3d::Identity() + a * w + b * w * w;
}

}  // namespace

PoseSE3 se3_exp(const Vector6& xi) {
  const Eigen::Vector3d omega = xi.head<3>();
  const Eigen::Vector3d v = xi.tail<3>();
  return {so3_exp(omega), left_jacobian(omega) * v};
}

Vector6 se3_log(const PoseSE3& pose) {
  const Eigen::Vector3d omega = so3_log(pose.rotation());
  Vector6 xi;
  xi.head<3>() = omega;
  xi.tail<3>() = left_jacobian(omega).partialPivLu().solve(pose.translation());
  return xi;
}

}  // namespace pixmotion
