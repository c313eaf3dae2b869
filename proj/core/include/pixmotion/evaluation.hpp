#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pixmotion/geometry.hpp"

namespace pixmotion {

struct StampedPose {
  double timestamp = 0.0;
  PoseSE3 pose;  // camera-to-world
};

// Timestamped poses, strictly increasing in time.
class Trajectory {
 public:
  Trajectory() = default;
  // Throws kInvalidArgument if timestamps are not strictly increasing.
  explicit Trajectory(std::vector<StampedPose> poses);

  [[nodiscard]] const std::vector<StampedPose>& poses() const noexcept { return poses_; }
  [[nodiscard]] std::size_t size() const noexcept { return poses_.size(); }
  [[nodiscard]] bool empty() const noexcept { return poses_.empty(); }
  [[nodiscard]] const StampedPose& operator[](std::size_t i) const { return poses_[i]; }

  // Appends at the end; throws if not later than the current last stamp.
  void push_back(StampedPose p);

 private:
  std::vector<StampedPose> poses_;
};

// TUM format: "timestamp tx ty tz qx qy qz qw" per line, '#' comments.
Trajectory read_tum_trajectory(std::istream& in);
Trajectory read_tum_trajectory(const std::filesystem::path& path);
void write_tum_trajectory(std::ostream& out, const Trajectory& trajectory);
void write_tum_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);

struct PosePair {
  std::size_t est = 0;  // index into the estimated trajectory
  std::size_t gt = 0;   // index into the ground truth
};

// Greedy matching: all candidate pairs with |dt| <= max_gap, taken in order
// of increasing |dt| (ties by estimate index, then gt index), each pose used
// at most once. Result sorted by estimate index. Throws kInvalidArgument when
// either side is empty or nothing matches.
std::vector<PosePair> associate_trajectories(const Trajectory& est, const Trajectory& gt, double max_gap = 0.02);

struct RigidAlignment {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  [[nodiscard]] Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
};

// Least-squares rigid map of `source` onto `target` (no scale), via SVD of
// the cross-covariance. Throws kDegenerate for fewer than 3 points or
// collinear configurations.
RigidAlignment align_rigid(const std::vector<Eigen::Vector3d>& source, const std::vector<Eigen::Vector3d>& target);

// Aligns estimated positions onto ground truth for the given pairs.
RigidAlignment align_umeyama(const Trajectory& est, const Trajectory& gt, const std::vector<PosePair>& pairs);

// sqrt(mean ||A * p_est - p_gt||^2). Throws kInvalidArgument for no pairs.
double ate_rmse(const Trajectory& est, const Trajectory& gt, const std::vector<PosePair>& pairs,
                const RigidAlignment& alignment);

// (last - first estimated stamp) / (t1 - t0), clamped to [0, 1]; 0 when empty.
double tracking_rate(const Trajectory& est, double t0, double t1);

struct EvalReport {
  double ate_rmse = 0.0;
  double tracking_rate = 0.0;
  std::size_t matched_pairs = 0;
  RigidAlignment alignment;
};

// Full evaluation. The span defaults to the ground-truth time range.
EvalReport evaluate(const Trajectory& est, const Trajectory& gt, double max_gap = 0.02);
EvalReport evaluate(const Trajectory& est, const Trajectory& gt, double t0, double t1, double max_gap = 0.02);

std::string format_report_text(const EvalReport& report);
// key=value lines (ate_rmse, tracking_rate, matched_pairs, alignment_*).
std::string format_report_kv(const EvalReport& report);

}  // namespace pixmotion
