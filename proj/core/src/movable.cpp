#include "pixmotion/movable.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace pixmotion {

void MovableParams::validate() const {
  if (!(clip_lo >= 0.0 && clip_lo < clip_hi && clip_hi <= 255.0)) {
    fail(ErrorKind::kInvalidArgument, "movable: require 0 <= clip_lo < clip_hi <= 255");
  }
  if (!(lambda_scale > 0.0)) fail(ErrorKind::kInvalidArgument, "movable: lambda_scale must be positive");
}

DiffChannels abs_diff(const ColorImage& frame, const ColorImage& background) {
  require_same_shape(frame, background, "abs_diff");
  DiffChannels out{ScalarGrid(frame.width(), frame.height()), ScalarGrid(frame.width(), frame.height())};
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const Rgb8& a = frame[i];
    const Rgb8& b = background[i];
    const int dr = std::abs(int(a.r) - int(b.r));
    const int dg = std::abs(int(a.g) - int(b.g));
    const int db = std::abs(int(a.b) - int(b.b));
    out.max_diff[i] = std::max({dr, dg, db});
    out.mean_diff[i] = (dr + dg + db) / 3.0;
  }
  return out;
}

double f1_clip_norm(double max_diff, const MovableParams& params) {
  return std::clamp((max_diff - params.clip_lo) / (params.clip_hi - params.clip_lo), 0.0, 1.0);
}

ScalarGrid f1_clip_norm(const ScalarGrid& max_diff, const MovableParams& params) {
  ScalarGrid out(max_diff.width(), max_diff.height());
  std::transform(max_diff.begin(), max_diff.end(), out.begin(),
                 [&](double v) { return f1_clip_norm(v, params); });
  return out;
}

ScalarGrid f2_minmax_norm(const ScalarGrid& mean_diff) {
  ScalarGrid out(mean_diff.width(), mean_diff.height(), 0.0);
  if (mean_diff.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(mean_diff.begin(), mean_diff.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  std::transform(mean_diff.begin(), mean_diff.end(), out.begin(),
                 [&](double v) { return (v - lo) / range; });
  return out;
}

double lambda_blend_weight(double max_mean_diff, const MovableParams& params) {
  return 0.5 + 1.0 / (std::exp(params.lambda_scale * max_mean_diff) + 1.0);
}

double lambda_blend_weight(const ScalarGrid& mean_diff, const MovableParams& params) {
  const double peak = mean_diff.empty() ? 0.0 : *std::max_element(mean_diff.begin(), mean_diff.end());
  return lambda_blend_weight(peak, params);
}

ProbabilityMap movable_probability(const ColorImage& frame, const ColorImage& background,
                                   const MovableParams& params) {
  params.validate();
  const DiffChannels diff = abs_diff(frame, background);
  const ScalarGrid f1 = f1_clip_norm(diff.max_diff, params);
  const ScalarGrid f2 = f2_minmax_norm(diff.mean_diff);
  const double lambda = lambda_blend_weight(diff.mean_diff, params);

  ProbabilityMap out(frame.width(), frame.height());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = std::clamp(lambda * f1[i] + (1.0 - lambda) * f2[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace pixmotion
