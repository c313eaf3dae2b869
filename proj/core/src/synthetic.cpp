#include "pixmotion/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

namespace pixmotion {

PoseSE3 CameraPath::pose_at(double frame) const {
  const Eigen::Matrix3d r = so3_exp(angular_velocity * frame) * start.rotation();
  return {r, start.translation() + linear_velocity * frame};
}

void SyntheticScene::validate() const {
  if (intrinsics.width <= 0 || intrinsics.height <= 0 || !(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) {
    fail(ErrorKind::kDegenerate, "synthetic scene: degenerate camera (zero-area frustum)");
  }
  intrinsics.validate();
  for (const PlaneSpec& p : planes) {
    if (p.axis < 0 || p.axis > 2) fail(ErrorKind::kInvalidArgument, "synthetic scene: plane axis must be 0, 1 or 2");
  }
  auto check_box = [](const BoxSpec& b) {
    if (!(b.min.array() < b.max.array()).all()) fail(ErrorKind::kInvalidArgument, "synthetic scene: box min must be < max");
  };
  for (const BoxSpec& b : static_boxes) check_box(b);
  for (const MovingBoxSpec& m : moving_boxes) {
    check_box(m.box);
    if (m.shadow && !(m.shadow->radii.array() > 0.0).all()) {
      fail(ErrorKind::kInvalidArgument, "synthetic scene: shadow radii must be positive");
    }
  }
  if (!(frame_interval > 0.0)) fail(ErrorKind::kInvalidArgument, "synthetic scene: frame interval must be positive");
  if (!(noise_sigma >= 0.0)) fail(ErrorKind::kInvalidArgument, "synthetic scene: noise sigma must be >= 0");
}

SyntheticScene SyntheticScene::desk_preset() {
  SyntheticScene s;
  s.intrinsics = {140.0, 140.0, 79.5, 59.5, 160, 120};

  PlaneSpec wall;
  wall.axis = 2;
  wall.position = 3.0;
  wall.texture = {{185.0, 175.0, 150.0}, 0.35, 0.25, 11};
  PlaneSpec floor;
  floor.axis = 1;
  floor.position = 0.5;
  floor.texture = {{150.0, 112.0, 80.0}, 0.4, 0.15, 23};
  floor.receives_shadows = true;
  s.planes = {wall, floor};

  s.static_boxes.push_back({{-0.95, 0.1, 2.3}, {-0.55, 0.5, 2.7}, {{60.0, 90.0, 170.0}, 0.4, 0.12, 31}});

  MovingBoxSpec mover;
  mover.box = {{-0.75, 0.15, 1.45}, {-0.4, 0.5, 1.75}, {{190.0, 50.0, 40.0}, 0.45, 0.1, 41}};
  mover.velocity = {0.025, 0.0, 0.0};
  ShadowDecal shadow;
  shadow.offset = {0.25, -0.1};
  shadow.radii = {0.28, 0.16};
  mover.shadow = shadow;
  s.moving_boxes.push_back(mover);

  s.camera.linear_velocity = {0.004, 0.0, 0.003};
  s.camera.angular_velocity = {0.0, 0.0015, 0.0};
  return s;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(long ix, long iy, std::uint32_t seed) {
  const std::uint64_t h = mix64(static_cast<std::uint64_t>(ix) * 0x8da6b343ULL ^
                                mix64(static_cast<std::uint64_t>(iy) * 0xd8163841ULL ^ seed));
  return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

double value_noise(double x, double y, std::uint32_t seed) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const long ix = static_cast<long>(fx);
  const long iy = static_cast<long>(fy);
  const double tx = x - fx;
  const double ty = y - fy;
  const double sx = tx * tx * (3.0 - 2.0 * tx);
  const double sy = ty * ty * (3.0 - 2.0 * ty);
  const double a = lattice(ix, iy, seed);
  const double b = lattice(ix + 1, iy, seed);
  const double c = lattice(ix, iy + 1, seed);
  const double d = lattice(ix + 1, iy + 1, seed);
  return (1 - sy) * ((1 - sx) * a + sx * b) + sy * ((1 - sx) * c + sx * d);
}

Eigen::Vector3d shade(const Texture& tex, double u, double v) {
  const double n = 0.65 * value_noise(u / tex.scale, v / tex.scale, tex.seed) +
                   0.35 * value_noise(2.0 * u / tex.scale, 2.0 * v / tex.scale, tex.seed + 17);
  return (tex.color * (1.0 + tex.contrast * n)).cwiseMax(0.0).cwiseMin(255.0);
}

std::pair<int, int> free_axes(int axis) {
  return axis == 0 ? std::pair{1, 2} : (axis == 1 ? std::pair{0, 2} : std::pair{0, 1});
}

// Slab test. Returns the entry distance and axis of the entry face.
bool intersect_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, const Eigen::Vector3d& origin,
                   const Eigen::Vector3d& dir, double& t_hit, int& axis) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = 0;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < lo[a] || origin[a] > hi[a]) return false;
      continue;
    }
    double t1 = (lo[a] - origin[a]) / dir[a];
    double t2 = (hi[a] - origin[a]) / dir[a];
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_near) {
      t_near = t1;
      near_axis = a;
    }
    t_far = std::min(t_far, t2);
  }
  if (!(t_near <= t_far) || !(t_near > 1e-9)) return false;
  t_hit = t_near;
  axis = near_axis;
  return true;
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  int surface = -1;
  int moving = -1;
  int face_axis = 2;
};

Eigen::Vector3d box_offset(const MovingBoxSpec& m, std::size_t frame) { return m.velocity * double(frame); }

Eigen::Vector3d pixel_ray(const Intrinsics& k, double u, double v) {
  return {(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
}

Hit trace(const SyntheticScene& s, std::size_t frame, bool dynamic, const Eigen::Vector3d& origin,
          const Eigen::Vector3d& dir) {
  Hit best;
  int surface = 0;
  for (const PlaneSpec& p : s.planes) {
    const double d = dir[p.axis];
    if (std::abs(d) > 1e-15) {
      const double t = (p.position - origin[p.axis]) / d;
      if (t > 1e-9 && t < best.t) best = {t, surface, -1, p.axis};
    }
    ++surface;
  }
  for (const BoxSpec& b : s.static_boxes) {
    double t;
    int axis;
    if (intersect_box(b.min, b.max, origin, dir, t, axis) && t < best.t) best = {t, surface, -1, axis};
    ++surface;
  }
  if (dynamic) {
    for (std::size_t m = 0; m < s.moving_boxes.size(); ++m) {
      const Eigen::Vector3d off = box_offset(s.moving_boxes[m], frame);
      double t;
      int axis;
      const BoxSpec& b = s.moving_boxes[m].box;
      if (intersect_box(b.min + off, b.max + off, origin, dir, t, axis) && t < best.t) {
        best = {t, surface, static_cast<int>(m), axis};
      }
      ++surface;
    }
  }
  return best;
}

}  // namespace

SyntheticRenderer::SyntheticRenderer(SyntheticScene scene) : scene_(std::move(scene)) { scene_.validate(); }

SceneHits SyntheticRenderer::cast(std::size_t frame, bool dynamic) const {
  const Intrinsics& k = scene_.intrinsics;
  const PoseSE3 pose = camera_pose(frame);
  SceneHits hits{ScalarGrid(k.width, k.height, 0.0), Grid<Point3>(k.width, k.height, Point3::Zero()),
                 Grid<int>(k.width, k.height, -1), Grid<int>(k.width, k.height, -1)};
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d dir = pose.rotation() * pixel_ray(k, x, y);
      const Hit h = trace(scene_, frame, dynamic, pose.translation(), dir);
      if (h.surface < 0) continue;
      // The camera-frame ray has unit z, so the ray parameter is the depth.
      hits.depth(x, y) = h.t;
      hits.world(x, y) = pose.translation() + h.t * dir;
      hits.surface(x, y) = h.surface;
      hits.moving_object(x, y) = h.moving;
    }
  }
  return hits;
}

RenderedView SyntheticRenderer::render(std::size_t frame, bool dynamic) const {
  const Intrinsics& k = scene_.intrinsics;
  const PoseSE3 pose = camera_pose(frame);
  const std::size_t n_planes = scene_.planes.size();
  const std::size_t n_static = scene_.static_boxes.size();

  RenderedView view{ColorImage(k.width, k.height), DepthMap(k.width, k.height), Mask(k.width, k.height, 0),
                    Mask(k.width, k.height, 0)};
  std::vector<RgbD> color(static_cast<std::size_t>(k.width) * k.height, RgbD{0.0, 0.0, 0.0});

  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d dir = pose.rotation() * pixel_ray(k, x, y);
      const Hit h = trace(scene_, frame, dynamic, pose.translation(), dir);
      if (h.surface < 0) continue;
      const Eigen::Vector3d p = pose.translation() + h.t * dir;
      view.depth.set(x, y, h.t);

      Eigen::Vector3d c;
      const auto idx = static_cast<std::size_t>(h.surface);
      if (idx < n_planes) {
        const PlaneSpec& plane = scene_.planes[idx];
        const auto [a1, a2] = free_axes(plane.axis);
        c = shade(plane.texture, p[a1], p[a2]);
        if (dynamic && plane.receives_shadows) {
          for (const MovingBoxSpec& m : scene_.moving_boxes) {
            if (!m.shadow) continue;
            const Eigen::Vector3d centre = 0.5 * (m.box.min + m.box.max) + box_offset(m, frame);
            const double du = (p[a1] - centre[a1] - m.shadow->offset.x()) / m.shadow->radii.x();
            const double dv = (p[a2] - centre[a2] - m.shadow->offset.y()) / m.shadow->radii.y();
            if (du * du + dv * dv <= 1.0) {
              c = (1.0 - m.shadow->opacity) * c + m.shadow->opacity * m.shadow->color;
              view.shadow_mask(x, y) = 1;
            }
          }
        }
      } else {
        const BoxSpec* box;
        Eigen::Vector3d local;
        if (idx < n_planes + n_static) {
          box = &scene_.static_boxes[idx - n_planes];
          local = p - box->min;
        } else {
          const MovingBoxSpec& m = scene_.moving_boxes[static_cast<std::size_t>(h.moving)];
          box = &m.box;
          local = p - (m.box.min + box_offset(m, frame));
          view.moving_mask(x, y) = 1;
        }
        const auto [a1, a2] = free_axes(h.face_axis);
        // Offset per face axis so adjacent faces do not share a pattern.
        c = shade(box->texture, local[a1] + 7.3 * h.face_axis, local[a2]);
      }
      color[static_cast<std::size_t>(y) * k.width + x] = {c.x(), c.y(), c.z()};
    }
  }

  if (scene_.noise_sigma > 0.0) {
    std::mt19937_64 rng(mix64(scene_.seed ^ mix64(frame * 2 + (dynamic ? 1 : 0))));
    std::normal_distribution<double> noise(0.0, scene_.noise_sigma);
    for (RgbD& c : color) {
      for (double& v : c) v += noise(rng);
    }
  }
  for (std::size_t i = 0; i < color.size(); ++i) {
    auto q = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
    view.rgb[i] = {q(color[i][0]), q(color[i][1]), q(color[i][2])};
  }
  return view;
}

FlowField SyntheticRenderer::residual_flow(std::size_t frame, int offset) const {
  const Intrinsics& k = scene_.intrinsics;
  const SceneHits hits = cast(frame, true);
  const PoseSE3 world_to_camera = camera_pose(frame).inverse();
  FlowField flow(k.width, k.height);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const int m = hits.moving_object(x, y);
      if (hits.surface(x, y) < 0) {
        flow.valid(x, y) = 0;
        continue;
      }
      if (m < 0) continue;
      const Point3 moved = hits.world(x, y) + scene_.moving_boxes[static_cast<std::size_t>(m)].velocity * offset;
      const Point3 q = world_to_camera * moved;
      if (!(q.z() > 0.0)) {
        flow.valid(x, y) = 0;
        continue;
      }
      const Pixel px = project(q, k);
      flow.du(x, y) = px.x() - x;
      flow.dv(x, y) = px.y() - y;
    }
  }
  return flow;
}

FlowField SyntheticRenderer::forward_flow(std::size_t frame) const {
  const Intrinsics& k = scene_.intrinsics;
  const SceneHits hits = cast(frame, true);
  const PoseSE3 next_world_to_camera = camera_pose(frame + 1).inverse();
  FlowField flow(k.width, k.height);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (hits.surface(x, y) < 0) {
        flow.valid(x, y) = 0;
        continue;
      }
      Point3 p = hits.world(x, y);
      const int m = hits.moving_object(x, y);
      if (m >= 0) p += scene_.moving_boxes[static_cast<std::size_t>(m)].velocity;
      const Point3 q = next_world_to_camera * p;
      if (!(q.z() > 0.0)) {
        flow.valid(x, y) = 0;
        continue;
      }
      const Pixel px = project(q, k);
      flow.du(x, y) = px.x() - x;
      flow.dv(x, y) = px.y() - y;
    }
  }
  return flow;
}

SyntheticSequence render_synthetic_sequence(const SyntheticScene& scene, std::size_t frames) {
  const SyntheticRenderer renderer(scene);
  SyntheticSequence seq;
  seq.intrinsics = scene.intrinsics;
  for (std::size_t i = 0; i < frames; ++i) {
    RenderedView dyn = renderer.render(i, true);
    RenderedView bg = renderer.render(i, false);
    FrameBundle f;
    f.timestamp = scene.start_time + double(i) * scene.frame_interval;
    f.rgb = std::move(dyn.rgb);
    f.depth = std::move(dyn.depth);
    f.background_rgb = std::move(bg.rgb);
    f.background_depth = std::move(bg.depth);
    f.pose = renderer.camera_pose(i);

    ProbabilityMap gt(scene.intrinsics.width, scene.intrinsics.height);
    for (std::size_t p = 0; p < gt.values.size(); ++p) gt.values[p] = dyn.moving_mask[p] ? 1.0 : 0.0;

    seq.trajectory.push_back({f.timestamp, *f.pose});
    seq.frames.push_back(std::move(f));
    seq.moving_masks.push_back(std::move(dyn.moving_mask));
    seq.shadow_masks.push_back(std::move(dyn.shadow_mask));
    seq.ground_truth.push_back(std::move(gt));
    seq.forward_flows.push_back(i + 1 < frames ? renderer.forward_flow(i) : FlowField());
  }
  return seq;
}

std::optional<double> analytic_plane_depth(const SyntheticScene& scene, std::size_t plane, std::size_t frame,
                                           double u, double v) {
  const PlaneSpec& p = scene.planes.at(plane);
  const PoseSE3 pose = scene.camera.pose_at(double(frame));
  const Eigen::Vector3d dir = pose.rotation() * pixel_ray(scene.intrinsics, u, v);
  const double d = dir[p.axis];
  if (std::abs(d) < 1e-15) return std::nullopt;
  const double t = (p.position - pose.translation()[p.axis]) / d;
  if (!(t > 0.0)) return std::nullopt;
  return t;
}

// JSON scene description ----------------------------------------------------

namespace {

using nlohmann::json;

Eigen::Vector3d vec3(const json& j, const char* key, const Eigen::Vector3d& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) fail(ErrorKind::kFormat, std::string("scene: '") + key + "' must have 3 entries");
  return {v[0], v[1], v[2]};
}

Eigen::Vector2d vec2(const json& j, const char* key, const Eigen::Vector2d& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2) fail(ErrorKind::kFormat, std::string("scene: '") + key + "' must have 2 entries");
  return {v[0], v[1]};
}

json to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

Texture texture_from(const json& j) {
  Texture t;
  if (j.is_null()) return t;
  t.color = vec3(j, "color", t.color);
  t.contrast = j.value("contrast", t.contrast);
  t.scale = j.value("scale", t.scale);
  t.seed = j.value("seed", t.seed);
  if (!(t.scale > 0.0)) fail(ErrorKind::kFormat, "scene: texture scale must be positive");
  return t;
}

json texture_json(const Texture& t) {
  return {{"color", to_json(t.color)}, {"contrast", t.contrast}, {"scale", t.scale}, {"seed", t.seed}};
}

BoxSpec box_from(const json& j) {
  BoxSpec b;
  b.min = vec3(j, "min", b.min);
  b.max = vec3(j, "max", b.max);
  b.texture = texture_from(j.value("texture", json()));
  return b;
}

json box_json(const BoxSpec& b) {
  return {{"min", to_json(b.min)}, {"max", to_json(b.max)}, {"texture", texture_json(b.texture)}};
}

}  // namespace

SyntheticScene parse_scene_json(const std::string& text) {
  SyntheticScene s;
  try {
    const json j = json::parse(text);
    if (j.value("preset", std::string()) == "desk") s = SyntheticScene::desk_preset();
    if (j.contains("intrinsics")) {
      const json& k = j.at("intrinsics");
      s.intrinsics = {k.value("fx", s.intrinsics.fx), k.value("fy", s.intrinsics.fy), k.value("cx", s.intrinsics.cx),
                      k.value("cy", s.intrinsics.cy), k.value("width", s.intrinsics.width),
                      k.value("height", s.intrinsics.height)};
    }
    if (j.contains("planes")) {
      s.planes.clear();
      for (const json& p : j.at("planes")) {
        PlaneSpec plane;
        plane.axis = p.value("axis", plane.axis);
        plane.position = p.value("position", plane.position);
        plane.texture = texture_from(p.value("texture", json()));
        plane.receives_shadows = p.value("receives_shadows", false);
        s.planes.push_back(plane);
      }
    }
    if (j.contains("static_boxes")) {
      s.static_boxes.clear();
      for (const json& b : j.at("static_boxes")) s.static_boxes.push_back(box_from(b));
    }
    if (j.contains("moving_boxes")) {
      s.moving_boxes.clear();
      for (const json& b : j.at("moving_boxes")) {
        MovingBoxSpec m;
        m.box = box_from(b);
        m.velocity = vec3(b, "velocity", m.velocity);
        if (b.contains("shadow") && !b.at("shadow").is_null()) {
          const json& sh = b.at("shadow");
          ShadowDecal d;
          d.offset = vec2(sh, "offset", d.offset);
          d.radii = vec2(sh, "radii", d.radii);
          d.opacity = sh.value("opacity", d.opacity);
          d.color = vec3(sh, "color", d.color);
          m.shadow = d;
        }
        s.moving_boxes.push_back(m);
      }
    }
    if (j.contains("camera")) {
      const json& c = j.at("camera");
      const Eigen::Vector3d position = vec3(c, "position", s.camera.start.translation());
      const Eigen::Vector3d rotation = vec3(c, "rotation_vector", so3_log(s.camera.start.rotation()));
      s.camera.start = PoseSE3(so3_exp(rotation), position);
      s.camera.linear_velocity = vec3(c, "linear_velocity", s.camera.linear_velocity);
      s.camera.angular_velocity = vec3(c, "angular_velocity", s.camera.angular_velocity);
    }
    s.frame_interval = j.value("frame_interval", s.frame_interval);
    s.start_time = j.value("start_time", s.start_time);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("scene JSON: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticScene load_scene_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open scene file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scene_json(buffer.str());
}

std::string scene_to_json(const SyntheticScene& s) {
  json j;
  const Intrinsics& k = s.intrinsics;
  j["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
  j["planes"] = json::array();
  for (const PlaneSpec& p : s.planes) {
    j["planes"].push_back({{"axis", p.axis},
                           {"position", p.position},
                           {"texture", texture_json(p.texture)},
                           {"receives_shadows", p.receives_shadows}});
  }
  j["static_boxes"] = json::array();
  for (const BoxSpec& b : s.static_boxes) j["static_boxes"].push_back(box_json(b));
  j["moving_boxes"] = json::array();
  for (const MovingBoxSpec& m : s.moving_boxes) {
    json b = box_json(m.box);
    b["velocity"] = to_json(m.velocity);
    if (m.shadow) {
      b["shadow"] = {{"offset", to_json(m.shadow->offset)},
                     {"radii", to_json(m.shadow->radii)},
                     {"opacity", m.shadow->opacity},
                     {"color", to_json(m.shadow->color)}};
    }
    j["moving_boxes"].push_back(b);
  }
  j["camera"] = {{"position", to_json(s.camera.start.translation())},
                 {"rotation_vector", to_json(Eigen::Vector3d(so3_log(s.camera.start.rotation())))},
                 {"linear_velocity", to_json(s.camera.linear_velocity)},
                 {"angular_velocity", to_json(s.camera.angular_velocity)}};
  j["frame_interval"] = s.frame_interval;
  j["start_time"] = s.start_time;
  j["noise_sigma"] = s.noise_sigma;
  j["seed"] = s.seed;
  return j.dump(2);
}

}  // namespace pixmotion
