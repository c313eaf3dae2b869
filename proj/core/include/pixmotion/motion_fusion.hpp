#pragma once

#include <span>
#include <vector>

#include "pixmotion/flow.hpp"
#include "pixmotion/frame.hpp"

namespace pixmotion {

struct FusionParams {
  std::vector<int> offsets{2};  // frame offsets j; both t+j and t-j are used
  double mag_lo = 0.5;          // pixels; motion at or below maps to 0
  double mag_hi = 3.0;          // pixels; motion at or above maps to 1

  void validate() const;
};

// min(|F_dyn|, |F_dyn - F_bg|) per pixel. Where only the background flow is
// missing the raw dynamic magnitude is used; where the dynamic flow is
// missing the result is invalid.
MotionMap differenced_motion(const FlowField& dyn_flow, const FlowField& bg_flow);

// Per-pixel mean over the contributions that are valid there. With every
// contribution valid this is exactly (1 / 2n) * sum over j of (M(+j) + M(-j)).
// Throws kInvalidArgument for an empty list.
MotionMap temporal_average(std::span<const MotionMap> contributions);

// Clip-normalises a pixel magnitude into [0, 1].
double normalize_motion(double magnitude, const FusionParams& params);

// P = p_m * normalize_motion(M). Falls back to p_m where M is invalid.
ProbabilityMap final_probability(const ProbabilityMap& movable, const MotionMap& motion,
                                 const FusionParams& params = {});

}  // namespace pixmotion
