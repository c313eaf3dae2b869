#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "pixmotion/bundle_adjustment.hpp"

namespace pixmotion {

namespace {

[[noreturn]] void parse_error(int line, const std::string& what) {
  fail(ErrorKind::kFormat, "BA problem line " + std::to_string(line) + ": " + what);
}

bool parse_flag(std::istringstream& in) {
  int flag = -1;
  in >> flag;
  if (flag != 0 && flag != 1) throw std::invalid_argument("fixed flag must be 0 or 1");
  return flag == 1;
}

}  // namespace

BAProblem read_ba_problem(std::istream& in) {
  BAProblem problem;
  bool have_header = false;
  bool have_camera = false;
  std::size_t n_poses = 0;
  std::size_t n_points = 0;
  std::size_t n_obs = 0;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto start = raw.find_first_not_of(" \t\r");
    if (start == std::string::npos || raw[start] == '#') continue;
    std::istringstream line(raw);
    std::string tag;
    line >> tag;
    try {
      if (tag == "BA") {
        line >> n_poses >> n_points >> n_obs;
        if (!line) parse_error(line_no, "malformed header");
        problem.poses.resize(n_poses);
        problem.points.resize(n_points);
        problem.observations.reserve(n_obs);
        have_header = true;
        continue;
      }
      if (!have_header) parse_error(line_no, "record before BA header");
      if (tag == "CAMERA") {
        Intrinsics& k = problem.intrinsics;
        line >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height;
        if (!line) parse_error(line_no, "malformed CAMERA record");
        have_camera = true;
      } else if (tag == "POSE") {
        std::size_t idx = 0;
        line >> idx;
        const bool fixed = parse_flag(line);
        double qw, qx, qy, qz, tx, ty, tz;
        line >> qw >> qx >> qy >> qz >> tx >> ty >> tz;
        if (!line) parse_error(line_no, "malformed POSE record");
        if (idx >= n_poses) parse_error(line_no, "pose index out of range");
        problem.poses[idx] = {PoseSE3::from_quaternion(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz}), fixed};
      } else if (tag == "POINT") {
        std::size_t idx = 0;
        line >> idx;
        const bool fixed = parse_flag(line);
        double x, y, z, prob;
        line >> x >> y >> z >> prob;
        if (!line) parse_error(line_no, "malformed POINT record");
        if (idx >= n_points) parse_error(line_no, "point index out of range");
        problem.points[idx] = {TrackedPoint(static_cast<std::int64_t>(idx), Pixel::Zero(), {x, y, z}, prob), fixed};
      } else if (tag == "OBS") {
        Observation o;
        line >> o.pose >> o.point >> o.measured.x() >> o.measured.y();
        if (!line) parse_error(line_no, "malformed OBS record");
        problem.observations.push_back(o);
      } else {
        parse_error(line_no, "unknown record '" + tag + "'");
      }
    } catch (const std::invalid_argument& e) {
      parse_error(line_no, e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kFormat) throw;
      parse_error(line_no, e.what());
    }
  }
  if (!have_header) fail(ErrorKind::kFormat, "BA problem: missing header");
  if (!have_camera) fail(ErrorKind::kFormat, "BA problem: missing CAMERA record");
  if (problem.observations.size() != n_obs) fail(ErrorKind::kFormat, "BA problem: observation count mismatch");
  problem.validate();
  return problem;
}

BAProblem read_ba_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return read_ba_problem(in);
}

void write_ba_problem(std::ostream& out, const BAProblem& problem) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  const Intrinsics& k = problem.intrinsics;
  out << "BA " << problem.poses.size() << ' ' << problem.points.size() << ' ' << problem.observations.size() << '\n';
  out << "CAMERA " << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << ' ' << k.width << ' ' << k.height << '\n';
  for (std::size_t i = 0; i < problem.poses.size(); ++i) {
    const PoseSE3& pose = problem.poses[i].world_to_camera;
    const Eigen::Quaterniond q = pose.quaternion();
    const Eigen::Vector3d& t = pose.translation();
    out << "POSE " << i << ' ' << (problem.poses[i].fixed ? 1 : 0) << ' ' << q.w() << ' ' << q.x() << ' ' << q.y()
        << ' ' << q.z() << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << '\n';
  }
  for (std::size_t i = 0; i < problem.points.size(); ++i) {
    const TrackedPoint& p = problem.points[i].point;
    out << "POINT " << i << ' ' << (problem.points[i].fixed ? 1 : 0) << ' ' << p.world().x() << ' ' << p.world().y()
        << ' ' << p.world().z() << ' ' << p.motion_prob() << '\n';
  }
  for (const Observation& o : problem.observations) {
    out << "OBS " << o.pose << ' ' << o.point << ' ' << o.measured.x() << ' ' << o.measured.y() << '\n';
  }
  out.precision(old_precision);
}

void write_ba_problem(const std::filesystem::path& path, const BAProblem& problem) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  write_ba_problem(out, problem);
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace pixmotion
