#include "pixmotion/bundle_adjustment.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

namespace pixmotion {

void BAProblem::validate() const {
  intrinsics.validate();
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const Observation& o = observations[i];
    if (o.pose >= poses.size() || o.point >= points.size()) {
      fail(ErrorKind::kInvalidArgument, "observation " + std::to_string(i) + " references a missing pose or point");
    }
  }
  if (free_parameter_count() == 0) fail(ErrorKind::kInvalidArgument, "bundle adjustment problem has no free variables");
}

std::size_t BAProblem::free_parameter_count() const {
  std::size_t n = 0;
  for (const BAPose& p : poses) n += p.fixed ? 0 : 6;
  for (const BAPoint& p : points) n += p.fixed ? 0 : 3;
  return n;
}

Eigen::Vector2d reprojection_residual(const Pixel& measured, const PoseSE3& world_to_camera,
                                      const Point3& world, const Intrinsics& k) {
  return measured - project(world_to_camera * world, k);
}

ObservationJacobian analytic_jacobian(const PoseSE3& world_to_camera, const Point3& world, const Intrinsics& k) {
  const Point3 p = world_to_camera * world;
  if (!(p.z() > 0.0)) fail(ErrorKind::kBehindCamera, "analytic_jacobian: point behind camera");
  const double iz = 1.0 / p.z();
  const double iz2 = iz * iz;
  Eigen::Matrix<double, 2, 3> proj;
  proj << k.fx * iz, 0.0, -k.fx * p.x() * iz2, 0.0, k.fy * iz, -k.fy * p.y() * iz2;

  ObservationJacobian j;
  // r = x - pi(p): both blocks carry the leading minus sign.
  j.pose.leftCols<3>() = proj * skew(p);
  j.pose.rightCols<3>() = -proj;
  j.point = -proj * world_to_camera.rotation();
  return j;
}

namespace {

bool in_front(const BAProblem& problem, const Observation& o) {
  return (problem.poses[o.pose].world_to_camera * problem.points[o.point].point.world()).z() > 0.0;
}

// Observations that take part in the optimisation: positive weight and in
// front of the camera at the start of the solve.
std::vector<std::size_t> active_observations(const BAProblem& problem, std::size_t* excluded) {
  std::vector<std::size_t> active;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < problem.observations.size(); ++i) {
    const Observation& o = problem.observations[i];
    if (!in_front(problem, o)) {
      ++skipped;
      continue;
    }
    if (problem.points[o.point].point.weight() == 0.0) continue;
    active.push_back(i);
  }
  if (excluded) *excluded = skipped;
  return active;
}

// Infinity when an active observation falls behind its camera.
double cost_over(const BAProblem& problem, const std::vector<std::size_t>& active) {
  double cost = 0.0;
  for (std::size_t i : active) {
    const Observation& o = problem.observations[i];
    const BAPoint& pt = problem.points[o.point];
    const Point3 p = problem.poses[o.pose].world_to_camera * pt.point.world();
    if (!(p.z() > 0.0)) return std::numeric_limits<double>::infinity();
    const Eigen::Vector2d r = o.measured - project(p, problem.intrinsics);
    cost += 0.5 * pt.point.weight() * r.squaredNorm();
  }
  return cost;
}

struct ParameterLayout {
  std::vector<long> pose_offset;   // -1 when fixed
  std::vector<long> point_offset;  // -1 when fixed
  long size = 0;
};

ParameterLayout layout_of(const BAProblem& problem) {
  ParameterLayout layout;
  for (const BAPose& p : problem.poses) {
    layout.pose_offset.push_back(p.fixed ? -1 : layout.size);
    if (!p.fixed) layout.size += 6;
  }
  for (const BAPoint& p : problem.points) {
    layout.point_offset.push_back(p.fixed ? -1 : layout.size);
    if (!p.fixed) layout.size += 3;
  }
  return layout;
}

void build_normal_equations(const BAProblem& problem, const std::vector<std::size_t>& active,
                            const ParameterLayout& layout, Eigen::MatrixXd& h, Eigen::VectorXd& g) {
  h.setZero(layout.size, layout.size);
  g.setZero(layout.size);
  for (std::size_t i : active) {
    const Observation& o = problem.observations[i];
    const BAPoint& pt = problem.points[o.point];
    const PoseSE3& pose = problem.poses[o.pose].world_to_camera;
    const double w = pt.point.weight();
    const Eigen::Vector2d r = reprojection_residual(o.measured, pose, pt.point.world(), problem.intrinsics);
    const ObservationJacobian j = analytic_jacobian(pose, pt.point.world(), problem.intrinsics);

    const long a = layout.pose_offset[o.pose];
    const long b = layout.point_offset[o.point];
    if (a >= 0) {
      h.block<6, 6>(a, a).noalias() += w * j.pose.transpose() * j.pose;
      g.segment<6>(a).noalias() += w * j.pose.transpose() * r;
    }
    if (b >= 0) {
      h.block<3, 3>(b, b).noalias() += w * j.point.transpose() * j.point;
      g.segment<3>(b).noalias() += w * j.point.transpose() * r;
    }
    if (a >= 0 && b >= 0) {
      const Eigen::Matrix<double, 6, 3> cross = w * j.pose.transpose() * j.point;
      h.block<6, 3>(a, b) += cross;
      h.block<3, 6>(b, a) += cross.transpose();
    }
  }
}

void check_rank(const Eigen::MatrixXd& h) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const double largest = d.size() ? d.maxCoeff() : 0.0;
  if (ldlt.info() != Eigen::Success || !(largest > 0.0) || d.minCoeff() <= 1e-12 * largest) {
    fail(ErrorKind::kDegenerate, "bundle adjustment: normal equations are rank deficient");
  }
}

BAProblem apply_update(const BAProblem& problem, const ParameterLayout& layout, const Eigen::VectorXd& delta) {
  BAProblem next = problem;
  for (std::size_t i = 0; i < next.poses.size(); ++i) {
    const long a = layout.pose_offset[i];
    if (a < 0) continue;
    next.poses[i].world_to_camera = se3_exp(delta.segment<6>(a)) * next.poses[i].world_to_camera;
  }
  for (std::size_t i = 0; i < next.points.size(); ++i) {
    const long b = layout.point_offset[i];
    if (b < 0) continue;
    next.points[i].point.set_world(next.points[i].point.world() + delta.segment<3>(b));
  }
  return next;
}

}  // namespace

ResidualSet weighted_ba_residuals(const BAProblem& problem) {
  problem.intrinsics.validate();
  ResidualSet out;
  for (std::size_t i = 0; i < problem.observations.size(); ++i) {
    const Observation& o = problem.observations[i];
    if (o.pose >= problem.poses.size() || o.point >= problem.points.size()) {
      fail(ErrorKind::kInvalidArgument, "observation " + std::to_string(i) + " references a missing pose or point");
    }
    if (!in_front(problem, o)) {
      out.excluded.push_back(i);
    } else {
      out.used.push_back(i);
    }
  }
  out.residuals.resize(2 * static_cast<long>(out.used.size()));
  out.weights.resize(static_cast<long>(out.used.size()));
  for (std::size_t n = 0; n < out.used.size(); ++n) {
    const Observation& o = problem.observations[out.used[n]];
    const BAPoint& pt = problem.points[o.point];
    out.residuals.segment<2>(2 * static_cast<long>(n)) =
        reprojection_residual(o.measured, problem.poses[o.pose].world_to_camera, pt.point.world(), problem.intrinsics);
    out.weights[static_cast<long>(n)] = pt.point.weight();
  }
  return out;
}

double weighted_cost(const BAProblem& problem) {
  const ResidualSet r = weighted_ba_residuals(problem);
  double cost = 0.0;
  for (long n = 0; n < r.weights.size(); ++n) cost += 0.5 * r.weights[n] * r.residuals.segment<2>(2 * n).squaredNorm();
  return cost;
}

BAResult solve_weighted_ba(const BAProblem& problem, const SolverConfig& config) {
  problem.validate();
  if (config.max_iterations < 0 || !(config.initial_damping > 0.0) || !(config.damping_increase > 1.0) ||
      !(config.damping_decrease > 1.0)) {
    fail(ErrorKind::kInvalidArgument, "solver configuration out of range");
  }

  BAResult result{problem, {}};
  SolveReport& report = result.report;
  const std::vector<std::size_t> active = active_observations(problem, &report.excluded_observations);
  const ParameterLayout layout = layout_of(problem);

  double cost = cost_over(result.problem, active);
  report.initial_cost = cost;
  report.cost_history.push_back(cost);

  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  build_normal_equations(result.problem, active, layout, h, g);
  check_rank(h);

  if (cost == 0.0) {
    report.converged = true;
    report.final_cost = 0.0;
    return result;
  }

  double damping = config.initial_damping;
  bool stale = false;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    report.iterations = iter;
    if (stale) {
      build_normal_equations(result.problem, active, layout, h, g);
      stale = false;
    }
    Eigen::MatrixXd damped = h;
    damped.diagonal().array() += damping;
    // g = J^T W r with J = dr/dx, so the Gauss-Newton step solves H dx = -g.
    const Eigen::VectorXd delta = damped.ldlt().solve(-g);
    if (!delta.allFinite()) fail(ErrorKind::kDegenerate, "bundle adjustment: non-finite update");
    if (delta.norm() < config.update_tol) {
      report.converged = true;
      break;
    }

    BAProblem candidate = apply_update(result.problem, layout, delta);
    const double candidate_cost = cost_over(candidate, active);
    if (candidate_cost < cost) {
      const double relative = (cost - candidate_cost) / cost;
      result.problem = std::move(candidate);
      cost = candidate_cost;
      report.cost_history.push_back(cost);
      damping = std::max(damping / config.damping_decrease, 1e-15);
      stale = true;
      if (relative < config.relative_cost_tol || cost == 0.0) {
        report.converged = true;
        break;
      }
    } else {
      damping *= config.damping_increase;
      // No damped step lowers the cost any more: we are at the minimum to
      // working precision.
      if (damping > config.max_damping) {
        report.converged = true;
        break;
      }
    }
  }
  report.final_cost = cost;
  return result;
}

}  // namespace pixmotion
