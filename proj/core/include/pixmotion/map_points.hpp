#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pixmotion/geometry.hpp"

namespace pixmotion {

// A feature / map point. The optimisation weight is always 1 - motion_prob;
// the only way to change either is set_motion_prob().
class TrackedPoint {
 public:
  TrackedPoint() = default;
  TrackedPoint(std::int64_t id, Pixel pixel, Point3 world, double motion_prob);

  [[nodiscard]] std::int64_t id() const noexcept { return id_; }
  [[nodiscard]] const Pixel& pixel() const noexcept { return pixel_; }
  [[nodiscard]] const Point3& world() const noexcept { return world_; }
  [[nodiscard]] double motion_prob() const noexcept { return motion_prob_; }
  [[nodiscard]] double weight() const noexcept { return weight_; }

  void set_pixel(const Pixel& px) { pixel_ = px; }
  void set_world(const Point3& p) { world_ = p; }
  // Throws kInvalidArgument outside [0, 1].
  void set_motion_prob(double p);

  bool operator==(const TrackedPoint&) const = default;

 private:
  std::int64_t id_ = 0;
  Pixel pixel_ = Pixel::Zero();
  Point3 world_ = Point3::Zero();
  double motion_prob_ = 0.0;
  double weight_ = 1.0;
};

struct SelectionParams {
  double p_add = 0.05;
  double p_del = 0.1;

  void validate() const;
};

// Candidates with motion_prob <= p_add, in input order.
std::vector<TrackedPoint> select_map_points(const std::vector<TrackedPoint>& candidates,
                                            const SelectionParams& params = {});

// Removes points whose current-frame probability is >= p_del. Survivors that
// were observed take the new probability (and weight); unobserved points are
// kept untouched. Order is preserved.
std::vector<TrackedPoint> cull_map_points(const std::vector<TrackedPoint>& existing,
                                          const std::unordered_map<std::int64_t, double>& current_probs,
                                          const SelectionParams& params = {});

}  // namespace pixmotion
