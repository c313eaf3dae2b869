#include "pixmotion/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pixmotion/association.hpp"
#include "pixmotion/image_io.hpp"

namespace pixmotion {

namespace fs = std::filesystem;

namespace {

bool same_pose(const std::optional<PoseSE3>& a, const std::optional<PoseSE3>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->rotation() == b->rotation() && a->translation() == b->translation();
}

}  // namespace

bool ManifestFrame::operator==(const ManifestFrame& other) const {
  return timestamp == other.timestamp && rgb == other.rgb && depth == other.depth &&
         background_rgb == other.background_rgb && background_depth == other.background_depth &&
         same_pose(pose, other.pose);
}

bool SequenceManifest::operator==(const SequenceManifest& other) const {
  return root == other.root && intrinsics == other.intrinsics && depth_scale == other.depth_scale &&
         frames == other.frames && dropped_frames == other.dropped_frames;
}

void SequenceManifest::validate(bool check_files) const {
  intrinsics.validate();
  if (!(depth_scale > 0.0)) fail(ErrorKind::kInvalidArgument, "manifest: depth scale must be positive");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!(frames[i].timestamp > frames[i - 1].timestamp)) {
      fail(ErrorKind::kInvalidArgument, "manifest: timestamps must be strictly increasing");
    }
  }
  if (!check_files) return;
  auto require = [&](const fs::path& rel) {
    if (!fs::exists(root / rel)) fail(ErrorKind::kIo, "manifest references missing file " + (root / rel).string());
  };
  for (const ManifestFrame& f : frames) {
    require(f.rgb);
    require(f.depth);
    require(f.background_rgb);
    if (f.background_depth) require(*f.background_depth);
  }
}

std::vector<IndexEntry> read_tum_index(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "missing index file " + path.string());
  std::vector<IndexEntry> entries;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto start = raw.find_first_not_of(" \t\r");
    if (start == std::string::npos || raw[start] == '#') continue;
    std::istringstream line(raw);
    IndexEntry e;
    if (!(line >> e.timestamp)) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected a timestamp");
    }
    for (std::string f; line >> f;) e.fields.push_back(f);
    if (e.fields.empty()) fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": missing value");
    entries.push_back(std::move(e));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const IndexEntry& a, const IndexEntry& b) { return a.timestamp < b.timestamp; });
  return entries;
}

namespace {

std::optional<PoseSE3> parse_tum_pose(const IndexEntry& e) {
  if (e.fields.size() < 7) fail(ErrorKind::kFormat, "groundtruth entry needs tx ty tz qx qy qz qw");
  double v[7];
  for (int i = 0; i < 7; ++i) v[i] = std::stod(e.fields[static_cast<std::size_t>(i)]);
  return PoseSE3::from_quaternion(Eigen::Quaterniond(v[6], v[3], v[4], v[5]), {v[0], v[1], v[2]});
}

}  // namespace

SequenceManifest load_tum_sequence(const fs::path& root, const TumLoadOptions& options) {
  const std::vector<IndexEntry> rgb = read_tum_index(root / "rgb.txt");
  const std::vector<IndexEntry> depth = read_tum_index(root / "depth.txt");
  std::vector<IndexEntry> gt;
  if (fs::exists(root / "groundtruth.txt")) gt = read_tum_index(root / "groundtruth.txt");

  std::vector<double> rgb_t;
  std::vector<double> depth_t;
  std::vector<double> gt_t;
  for (const auto& e : rgb) rgb_t.push_back(e.timestamp);
  for (const auto& e : depth) depth_t.push_back(e.timestamp);
  for (const auto& e : gt) gt_t.push_back(e.timestamp);

  SequenceManifest manifest;
  manifest.root = root;
  manifest.intrinsics = options.intrinsics;
  manifest.depth_scale = options.depth_scale;

  const auto pairs = associate_stamps(rgb_t, depth_t, options.max_time_gap);
  if (pairs.empty()) {
    fail(ErrorKind::kInvalidArgument, "no rgb/depth pairs within " + std::to_string(options.max_time_gap) + " s in " +
                                          root.string());
  }
  manifest.dropped_frames = rgb.size() - pairs.size();

  for (const auto& [i, j] : pairs) {
    ManifestFrame f;
    f.timestamp = rgb[i].timestamp;
    f.rgb = rgb[i].fields.front();
    f.depth = depth[j].fields.front();
    f.background_rgb = options.background_dir / f.rgb;
    if (fs::exists(root / options.background_dir / f.depth)) f.background_depth = options.background_dir / f.depth;
    if (!gt.empty()) {
      const auto it = std::lower_bound(gt_t.begin(), gt_t.end(), f.timestamp);
      std::size_t best = gt_t.size();
      double best_gap = std::numeric_limits<double>::infinity();
      for (auto cand : {it, it == gt_t.begin() ? it : std::prev(it)}) {
        if (cand == gt_t.end()) continue;
        const double gap = std::abs(*cand - f.timestamp);
        if (gap <= options.max_time_gap && gap < best_gap) {
          best_gap = gap;
          best = static_cast<std::size_t>(cand - gt_t.begin());
        }
      }
      if (best < gt.size()) f.pose = parse_tum_pose(gt[best]);
    }
    manifest.frames.push_back(std::move(f));
  }
  manifest.validate(true);
  return manifest;
}

void write_manifest(std::ostream& out, const SequenceManifest& manifest) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  const Intrinsics& k = manifest.intrinsics;
  out << "# pixmotion sequence manifest v1\n";
  out << "ROOT " << std::quoted(manifest.root.generic_string()) << '\n';
  out << "INTRINSICS " << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << ' ' << k.width << ' ' << k.height
      << '\n';
  out << "DEPTH_SCALE " << manifest.depth_scale << '\n';
  out << "DROPPED " << manifest.dropped_frames << '\n';
  for (const ManifestFrame& f : manifest.frames) {
    out << "FRAME " << f.timestamp << ' ' << std::quoted(f.rgb.generic_string()) << ' '
        << std::quoted(f.depth.generic_string()) << ' ' << std::quoted(f.background_rgb.generic_string()) << ' '
        << std::quoted(f.background_depth ? f.background_depth->generic_string() : std::string("-"));
    if (f.pose) {
      out << " POSE";
      const Eigen::Matrix3d& r = f.pose->rotation();
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) out << ' ' << r(row, col);
      }
      const Eigen::Vector3d& t = f.pose->translation();
      out << ' ' << t.x() << ' ' << t.y() << ' ' << t.z();
    }
    out << '\n';
  }
  out.precision(old_precision);
}

void write_manifest(const fs::path& path, const SequenceManifest& manifest) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  write_manifest(out, manifest);
}

SequenceManifest read_manifest(std::istream& in) {
  SequenceManifest manifest;
  manifest.frames.clear();
  std::string raw;
  int line_no = 0;
  auto bad = [&](const std::string& what) {
    fail(ErrorKind::kFormat, "manifest line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto start = raw.find_first_not_of(" \t\r");
    if (start == std::string::npos || raw[start] == '#') continue;
    std::istringstream line(raw);
    std::string tag;
    line >> tag;
    if (tag == "ROOT") {
      std::string root;
      if (!(line >> std::quoted(root))) bad("malformed ROOT");
      manifest.root = root;
    } else if (tag == "INTRINSICS") {
      Intrinsics& k = manifest.intrinsics;
      if (!(line >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height)) bad("malformed INTRINSICS");
    } else if (tag == "DEPTH_SCALE") {
      if (!(line >> manifest.depth_scale)) bad("malformed DEPTH_SCALE");
    } else if (tag == "DROPPED") {
      if (!(line >> manifest.dropped_frames)) bad("malformed DROPPED");
    } else if (tag == "FRAME") {
      ManifestFrame f;
      std::string rgb, depth, bg_rgb, bg_depth;
      if (!(line >> f.timestamp >> std::quoted(rgb) >> std::quoted(depth) >> std::quoted(bg_rgb) >>
            std::quoted(bg_depth))) {
        bad("malformed FRAME");
      }
      f.rgb = rgb;
      f.depth = depth;
      f.background_rgb = bg_rgb;
      if (bg_depth != "-") f.background_depth = fs::path(bg_depth);
      std::string pose_tag;
      if (line >> pose_tag) {
        if (pose_tag != "POSE") bad("unexpected token '" + pose_tag + "'");
        Eigen::Matrix3d r;
        Eigen::Vector3d t;
        for (int row = 0; row < 3; ++row) {
          for (int col = 0; col < 3; ++col) line >> r(row, col);
        }
        line >> t.x() >> t.y() >> t.z();
        if (!line) bad("malformed POSE");
        f.pose = PoseSE3(r, t);
      }
      manifest.frames.push_back(std::move(f));
    } else {
      bad("unknown record '" + tag + "'");
    }
  }
  manifest.validate(false);
  return manifest;
}

SequenceManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open manifest " + path.string());
  SequenceManifest manifest = read_manifest(in);
  if (manifest.root.empty()) manifest.root = path.parent_path();
  else if (manifest.root.is_relative()) manifest.root = path.parent_path() / manifest.root;
  return manifest;
}

ManifestSource::ManifestSource(SequenceManifest manifest) : manifest_(std::move(manifest)) {
  manifest_.validate(true);
}

FrameBundle ManifestSource::load(std::size_t index) const {
  const ManifestFrame& f = manifest_.frames.at(index);
  const fs::path& root = manifest_.root;
  FrameBundle bundle;
  bundle.timestamp = f.timestamp;
  bundle.rgb = read_color_image(root / f.rgb);
  bundle.depth = load_depth_png(root / f.depth, manifest_.depth_scale);
  bundle.background_rgb = read_color_image(root / f.background_rgb);
  if (f.background_depth) bundle.background_depth = load_depth_png(root / *f.background_depth, manifest_.depth_scale);
  bundle.pose = f.pose;
  bundle.validate(manifest_.intrinsics);
  return bundle;
}

namespace {

std::string stamp_name(double t) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << t;
  return s.str();
}

}  // namespace

SequenceManifest write_tum_sequence(const fs::path& root, const Intrinsics& k, const std::vector<FrameBundle>& frames,
                                    double depth_scale) {
  fs::create_directories(root);
  std::ofstream rgb_index(root / "rgb.txt");
  std::ofstream depth_index(root / "depth.txt");
  if (!rgb_index || !depth_index) fail(ErrorKind::kIo, "cannot write index files under " + root.string());
  rgb_index << "# timestamp filename\n";
  depth_index << "# timestamp filename\n";

  const bool with_poses = std::all_of(frames.begin(), frames.end(), [](const FrameBundle& f) { return f.pose.has_value(); });
  std::ofstream gt_index;
  if (with_poses && !frames.empty()) {
    gt_index.open(root / "groundtruth.txt");
    gt_index << "# timestamp tx ty tz qx qy qz qw\n";
    gt_index << std::setprecision(std::numeric_limits<double>::max_digits10);
  }

  SequenceManifest manifest;
  manifest.root = root;
  manifest.intrinsics = k;
  manifest.depth_scale = depth_scale;
  for (const FrameBundle& f : frames) {
    const std::string name = stamp_name(f.timestamp) + ".png";
    ManifestFrame mf;
    mf.timestamp = std::stod(stamp_name(f.timestamp));
    mf.rgb = fs::path("rgb") / name;
    mf.depth = fs::path("depth") / name;
    mf.background_rgb = fs::path("background") / mf.rgb;
    write_color_image(root / mf.rgb, f.rgb);
    write_depth_png(root / mf.depth, f.depth, depth_scale);
    write_color_image(root / mf.background_rgb, f.background_rgb);
    if (f.background_depth) {
      mf.background_depth = fs::path("background") / mf.depth;
      write_depth_png(root / *mf.background_depth, *f.background_depth, depth_scale);
    }
    rgb_index << stamp_name(f.timestamp) << ' ' << mf.rgb.generic_string() << '\n';
    depth_index << stamp_name(f.timestamp) << ' ' << mf.depth.generic_string() << '\n';
    if (gt_index.is_open()) {
      const Eigen::Quaterniond q = f.pose->quaternion();
      const Eigen::Vector3d& t = f.pose->translation();
      gt_index << stamp_name(f.timestamp) << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' '
               << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
    }
    mf.pose = f.pose;
    manifest.frames.push_back(std::move(mf));
  }
  manifest.validate(true);
  return manifest;
}

}  // namespace pixmotion
