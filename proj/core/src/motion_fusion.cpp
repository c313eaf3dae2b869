#include "pixmotion/motion_fusion.hpp"

#include <algorithm>
#include <cmath>

namespace pixmotion {

void FusionParams::validate() const {
  if (offsets.empty()) fail(ErrorKind::kInvalidArgument, "fusion: offset set J must be non-empty");
  for (int j : offsets) {
    if (j <= 0) fail(ErrorKind::kInvalidArgument, "fusion: offsets must be positive integers");
  }
  if (!(mag_lo >= 0.0 && mag_lo < mag_hi)) fail(ErrorKind::kInvalidArgument, "fusion: require 0 <= mag_lo < mag_hi");
}

MotionMap differenced_motion(const FlowField& dyn_flow, const FlowField& bg_flow) {
  require_same_shape(dyn_flow.du, bg_flow.du, "differenced_motion");
  MotionMap out(dyn_flow.width(), dyn_flow.height());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (!dyn_flow.valid[i]) {
      out.values[i] = 0.0;
      out.valid[i] = 0;
      continue;
    }
    const double raw = std::hypot(dyn_flow.du[i], dyn_flow.dv[i]);
    if (!bg_flow.valid[i]) {
      out.values[i] = raw;
      continue;
    }
    const double residual = std::hypot(dyn_flow.du[i] - bg_flow.du[i], dyn_flow.dv[i] - bg_flow.dv[i]);
    out.values[i] = std::max(0.0, std::min(raw, residual));
  }
  return out;
}

MotionMap temporal_average(std::span<const MotionMap> contributions) {
  if (contributions.empty()) fail(ErrorKind::kInvalidArgument, "temporal_average: no contributions");
  const MotionMap& first = contributions.front();
  for (const MotionMap& m : contributions) require_same_shape(first.values, m.values, "temporal_average");

  MotionMap out(first.values.width(), first.values.height());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double sum = 0.0;
    int count = 0;
    for (const MotionMap& m : contributions) {
      if (!m.valid[i]) continue;
      sum += m.values[i];
      ++count;
    }
    out.valid[i] = count > 0 ? 1 : 0;
    out.values[i] = count > 0 ? sum / count : 0.0;
  }
  return out;
}

double normalize_motion(double magnitude, const FusionParams& params) {
  return std::clamp((magnitude - params.mag_lo) / (params.mag_hi - params.mag_lo), 0.0, 1.0);
}

ProbabilityMap final_probability(const ProbabilityMap& movable, const MotionMap& motion,
                                 const FusionParams& params) {
  params.validate();
  require_same_shape(movable.values, motion.values, "final_probability");
  ProbabilityMap out(movable.width(), movable.height());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double pm = std::clamp(movable.values[i], 0.0, 1.0);
    out.valid[i] = movable.valid[i];
    out.values[i] = motion.valid[i] ? pm * normalize_motion(motion.values[i], params) : pm;
  }
  return out;
}

}  // namespace pixmotion
