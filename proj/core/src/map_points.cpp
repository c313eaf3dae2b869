#include "pixmotion/map_points.hpp"

#include <cmath>
#include <string>

namespace pixmotion {

TrackedPoint::TrackedPoint(std::int64_t id, Pixel pixel, Point3 world, double motion_prob)
    : id_(id), pixel_(std::move(pixel)), world_(std::move(world)) {
  set_motion_prob(motion_prob);
}

void TrackedPoint::set_motion_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorKind::kInvalidArgument, "motion probability " + std::to_string(p) + " outside [0, 1]");
  }
  motion_prob_ = p;
  weight_ = 1.0 - p;
}

void SelectionParams::validate() const {
  if (!(p_add >= 0.0 && p_add <= p_del && p_del <= 1.0)) {
    fail(ErrorKind::kInvalidArgument, "selection: require 0 <= p_add <= p_del <= 1");
  }
}

std::vector<TrackedPoint> select_map_points(const std::vector<TrackedPoint>& candidates,
                                            const SelectionParams& params) {
  params.validate();
  std::vector<TrackedPoint> accepted;
  for (const TrackedPoint& p : candidates) {
    if (p.motion_prob() <= params.p_add) accepted.push_back(p);
  }
  return accepted;
}

std::vector<TrackedPoint> cull_map_points(const std::vector<TrackedPoint>& existing,
                                          const std::unordered_map<std::int64_t, double>& current_probs,
                                          const SelectionParams& params) {
  params.validate();
  std::vector<TrackedPoint> survivors;
  survivors.reserve(existing.size());
  for (const TrackedPoint& p : existing) {
    const auto it = current_probs.find(p.id());
    if (it == current_probs.end()) {
      survivors.push_back(p);
      continue;
    }
    if (it->second >= params.p_del) continue;
    TrackedPoint updated = p;
    updated.set_motion_prob(it->second);
    survivors.push_back(std::move(updated));
  }
  return survivors;
}

}  // namespace pixmotion
