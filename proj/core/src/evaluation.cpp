#include "pixmotion/evaluation.hpp"

#include "pixmotion/association.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

namespace pixmotion {

Trajectory::Trajectory(std::vector<StampedPose> poses) {
  poses_.reserve(poses.size());
  for (StampedPose& p : poses) push_back(std::move(p));
}

void Trajectory::push_back(StampedPose p) {
  if (!std::isfinite(p.timestamp)) fail(ErrorKind::kInvalidArgument, "trajectory timestamp must be finite");
  if (!poses_.empty() && !(p.timestamp > poses_.back().timestamp)) {
    fail(ErrorKind::kInvalidArgument, "trajectory timestamps must be strictly increasing");
  }
  poses_.push_back(std::move(p));
}

Trajectory read_tum_trajectory(std::istream& in) {
  std::vector<StampedPose> poses;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::replace(raw.begin(), raw.end(), ',', ' ');
    const auto start = raw.find_first_not_of(" \t\r");
    if (start == std::string::npos || raw[start] == '#') continue;
    std::istringstream line(raw);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(line >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      fail(ErrorKind::kFormat, "trajectory line " + std::to_string(line_no) + ": expected 8 numbers");
    }
    poses.push_back({ts, PoseSE3::from_quaternion(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz})});
  }
  std::stable_sort(poses.begin(), poses.end(),
                   [](const StampedPose& a, const StampedPose& b) { return a.timestamp < b.timestamp; });
  return Trajectory(std::move(poses));
}

Trajectory read_tum_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open trajectory " + path.string());
  return read_tum_trajectory(in);
}

void write_tum_trajectory(std::ostream& out, const Trajectory& trajectory) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const StampedPose& p : trajectory.poses()) {
    const Eigen::Quaterniond q = p.pose.quaternion();
    const Eigen::Vector3d& t = p.pose.translation();
    out << p.timestamp << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' ' << q.y() << ' '
        << q.z() << ' ' << q.w() << '\n';
  }
  out.precision(old_precision);
}

void write_tum_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  out << "# timestamp tx ty tz qx qy qz qw\n";
  write_tum_trajectory(out, trajectory);
}

std::vector<PosePair> associate_trajectories(const Trajectory& est, const Trajectory& gt, double max_gap) {
  if (est.empty() || gt.empty()) fail(ErrorKind::kInvalidArgument, "associate: empty trajectory");
  if (!(max_gap >= 0.0)) fail(ErrorKind::kInvalidArgument, "associate: max_gap must be non-negative");
  std::vector<double> a;
  std::vector<double> b;
  for (const StampedPose& p : est.poses()) a.push_back(p.timestamp);
  for (const StampedPose& p : gt.poses()) b.push_back(p.timestamp);
  std::vector<PosePair> pairs;
  for (const auto& [i, j] : associate_stamps(a, b, max_gap)) pairs.push_back({i, j});
  if (pairs.empty()) fail(ErrorKind::kInvalidArgument, "associate: no timestamp pairs within max_gap");
  return pairs;
}

RigidAlignment align_rigid(const std::vector<Eigen::Vector3d>& source, const std::vector<Eigen::Vector3d>& target) {
  if (source.size() != target.size()) fail(ErrorKind::kInvalidArgument, "align: point count mismatch");
  if (source.size() < 3) fail(ErrorKind::kDegenerate, "align: need at least 3 point pairs");
  const double n = static_cast<double>(source.size());
  Eigen::Vector3d mu_s = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_t = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= n;
  mu_t /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d spread = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Eigen::Vector3d ds = source[i] - mu_s;
    cov += (target[i] - mu_t) * ds.transpose();
    spread += ds * ds.transpose();
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> spread_svd(spread);
  const Eigen::Vector3d sv = spread_svd.singularValues();
  if (!(sv(1) > 1e-12 * std::max(sv(0), 1e-300))) {
    fail(ErrorKind::kDegenerate, "align: points are collinear or coincident");
  }

  RigidAlignment a;
  if (source == target) return a;  // exact identity, so identical trajectories give exactly zero error

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;

  a.rotation = svd.matrixU() * s * svd.matrixV().transpose();
  a.translation = mu_t - a.rotation * mu_s;
  return a;
}

RigidAlignment align_umeyama(const Trajectory& est, const Trajectory& gt, const std::vector<PosePair>& pairs) {
  std::vector<Eigen::Vector3d> src;
  std::vector<Eigen::Vector3d> dst;
  src.reserve(pairs.size());
  dst.reserve(pairs.size());
  for (const PosePair& p : pairs) {
    src.push_back(est[p.est].pose.translation());
    dst.push_back(gt[p.gt].pose.translation());
  }
  return align_rigid(src, dst);
}

double ate_rmse(const Trajectory& est, const Trajectory& gt, const std::vector<PosePair>& pairs,
                const RigidAlignment& alignment) {
  if (pairs.empty()) fail(ErrorKind::kInvalidArgument, "ate_rmse: no pairs");
  double sum = 0.0;
  for (const PosePair& p : pairs) {
    sum += (alignment.apply(est[p.est].pose.translation()) - gt[p.gt].pose.translation()).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

double tracking_rate(const Trajectory& est, double t0, double t1) {
  if (!(t1 > t0)) fail(ErrorKind::kInvalidArgument, "tracking_rate: sequence span must be positive");
  if (est.empty()) return 0.0;
  const double tracked = est.poses().back().timestamp - est.poses().front().timestamp;
  return std::clamp(tracked / (t1 - t0), 0.0, 1.0);
}

EvalReport evaluate(const Trajectory& est, const Trajectory& gt, double t0, double t1, double max_gap) {
  EvalReport report;
  report.tracking_rate = tracking_rate(est, t0, t1);
  const std::vector<PosePair> pairs = associate_trajectories(est, gt, max_gap);
  report.matched_pairs = pairs.size();
  report.alignment = align_umeyama(est, gt, pairs);
  report.ate_rmse = ate_rmse(est, gt, pairs, report.alignment);
  return report;
}

EvalReport evaluate(const Trajectory& est, const Trajectory& gt, double max_gap) {
  if (gt.size() < 2) fail(ErrorKind::kInvalidArgument, "evaluate: ground truth needs at least two poses");
  return evaluate(est, gt, gt.poses().front().timestamp, gt.poses().back().timestamp, max_gap);
}

std::string format_report_text(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << "ATE RMSE      : " << report.ate_rmse << " m\n";
  out << "Tracking rate : " << std::setprecision(4) << report.tracking_rate << '\n';
  out << "Matched pairs : " << report.matched_pairs << '\n';
  return out.str();
}

std::string format_report_kv(const EvalReport& report) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "ate_rmse=" << report.ate_rmse << '\n';
  out << "tracking_rate=" << report.tracking_rate << '\n';
  out << "matched_pairs=" << report.matched_pairs << '\n';
  const Eigen::Quaterniond q(report.alignment.rotation);
  const Eigen::Vector3d& t = report.alignment.translation;
  out << "alignment_translation=" << t.x() << ' ' << t.y() << ' ' << t.z() << '\n';
  out << "alignment_quaternion=" << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
  return out.str();
}

}  // namespace pixmotion
