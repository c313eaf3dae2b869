#pragma once

#include "pixmotion/frame.hpp"

namespace pixmotion {

// Background-differencing prior: where in the frame motion *could* be
// happening (moving objects plus the shadows and reflections they cast).

struct MovableParams {
  double clip_lo = 15.0;
  double clip_hi = 35.0;
  double lambda_scale = 0.04;

  void validate() const;
};

// Per-pixel channel-wise |frame - background| reduced by max and by mean.
struct DiffChannels {
  ScalarGrid max_diff;
  ScalarGrid mean_diff;
};

DiffChannels abs_diff(const ColorImage& frame, const ColorImage& background);

// (x - clip_lo) / (clip_hi - clip_lo), clamped to [0, 1].
double f1_clip_norm(double max_diff, const MovableParams& params);
ScalarGrid f1_clip_norm(const ScalarGrid& max_diff, const MovableParams& params);

// Min-max normalisation over the whole frame. A constant frame maps to 0.
ScalarGrid f2_minmax_norm(const ScalarGrid& mean_diff);

// 1/2 + 1/(exp(lambda_scale * max(mean_diff)) + 1): a single scalar per frame.
double lambda_blend_weight(double max_mean_diff, const MovableParams& params);
double lambda_blend_weight(const ScalarGrid& mean_diff, const MovableParams& params);

// lambda * f1(max_diff) + (1 - lambda) * f2(mean_diff); always valid.
ProbabilityMap movable_probability(const ColorImage& frame, const ColorImage& background,
                                   const MovableParams& params = {});

}  // namespace pixmotion
