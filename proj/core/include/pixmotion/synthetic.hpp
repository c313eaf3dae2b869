#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pixmotion/evaluation.hpp"
#include "pixmotion/flow.hpp"
#include "pixmotion/frame.hpp"

namespace pixmotion {

// Desk-scale ray-cast scenes of textured axis-aligned planes and boxes with
// exact depth, motion masks and flow. World frame: x right, y down, z forward.

// Procedural value-noise texture: base colour modulated by two octaves of
// smooth lattice noise with feature size `scale` metres.
struct Texture {
  Eigen::Vector3d color{128.0, 128.0, 128.0};
  double contrast = 0.3;
  double scale = 0.1;
  std::uint32_t seed = 1;
};

// Infinite plane {p : p[axis] = position}.
struct PlaneSpec {
  int axis = 2;
  double position = 3.0;
  Texture texture;
  bool receives_shadows = false;
};

struct BoxSpec {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();
  Texture texture;
};

// Flat dark ellipse painted on every shadow-receiving plane around the
// projection of the owning box's centre (plus `offset`), moving with it.
struct ShadowDecal {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();  // in the plane's two free axes
  Eigen::Vector2d radii{0.2, 0.15};
  double opacity = 0.75;
  Eigen::Vector3d color{30.0, 30.0, 35.0};
};

// Box translating with constant velocity (metres per frame).
struct MovingBoxSpec {
  BoxSpec box;  // extent at frame 0
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  std::optional<ShadowDecal> shadow;
};

// Camera-to-world pose at frame i: rotation exp(i * angular) * R0,
// centre c0 + i * linear.
struct CameraPath {
  PoseSE3 start;
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();

  [[nodiscard]] PoseSE3 pose_at(double frame) const;
};

struct SyntheticScene {
  Intrinsics intrinsics{140.0, 140.0, 79.5, 59.5, 160, 120};
  std::vector<PlaneSpec> planes;
  std::vector<BoxSpec> static_boxes;
  std::vector<MovingBoxSpec> moving_boxes;
  CameraPath camera;
  double frame_interval = 1.0 / 30.0;  // seconds
  double start_time = 0.0;
  double noise_sigma = 0.0;            // Gaussian sensor noise, intensity levels
  std::uint64_t seed = 7;

  // Throws kDegenerate for a zero-area image / non-positive focal length and
  // kInvalidArgument for malformed geometry.
  void validate() const;

  // One moving box with a shadow decal, one static box, textured wall and
  // floor, slowly translating and panning camera.
  static SyntheticScene desk_preset();
};

SyntheticScene load_scene_json(const std::filesystem::path& path);
SyntheticScene parse_scene_json(const std::string& text);
std::string scene_to_json(const SyntheticScene& scene);

// Surface hit by each pixel's ray.
struct SceneHits {
  ScalarGrid depth;          // camera z of the hit (0 where nothing is hit)
  Grid<Point3> world;        // world hit point
  Grid<int> surface;         // -1 none, planes first, then static boxes, then moving boxes
  Grid<int> moving_object;   // index into moving_boxes, -1 otherwise
};

struct RenderedView {
  ColorImage rgb;
  DepthMap depth;
  Mask moving_mask;  // pixels on a moving object
  Mask shadow_mask;  // visible shadow-decal pixels (dynamic render only)
};

class SyntheticRenderer {
 public:
  explicit SyntheticRenderer(SyntheticScene scene);

  [[nodiscard]] const SyntheticScene& scene() const noexcept { return scene_; }
  [[nodiscard]] PoseSE3 camera_pose(std::size_t frame) const { return scene_.camera.pose_at(double(frame)); }

  // Ray-casts frame `frame`; with dynamic == false the moving boxes and their
  // shadows are removed.
  [[nodiscard]] SceneHits cast(std::size_t frame, bool dynamic) const;
  [[nodiscard]] RenderedView render(std::size_t frame, bool dynamic) const;

  // Motion of the scene point seen at each pixel of frame t between t and
  // t + offset, projected with the camera held at frame t. Zero on static
  // surfaces; invalid where nothing is hit or the point leaves the front of
  // the camera.
  [[nodiscard]] FlowField residual_flow(std::size_t frame, int offset) const;

  // Full optical flow from frame t to t+1 (camera and object motion).
  [[nodiscard]] FlowField forward_flow(std::size_t frame) const;

 private:
  SyntheticScene scene_;
};

struct SyntheticSequence {
  Intrinsics intrinsics;
  std::vector<FrameBundle> frames;
  std::vector<Mask> moving_masks;
  std::vector<Mask> shadow_masks;
  std::vector<ProbabilityMap> ground_truth;  // 1 on moving-object pixels
  std::vector<FlowField> forward_flows;      // t -> t+1 (last frame: empty)
  Trajectory trajectory;
};

// Deterministic for a given scene (including its seed).
SyntheticSequence render_synthetic_sequence(const SyntheticScene& scene, std::size_t frames);

// Analytic depth of plane `plane` along pixel (u, v) of frame `frame`, or
// nullopt when the ray is parallel to / points away from it.
std::optional<double> analytic_plane_depth(const SyntheticScene& scene, std::size_t plane, std::size_t frame,
                                           double u, double v);

}  // namespace pixmotion
