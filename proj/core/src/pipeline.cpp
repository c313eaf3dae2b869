#include "pixmotion/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace pixmotion {

InMemorySequence::InMemorySequence(Intrinsics k, std::vector<FrameBundle> frames)
    : k_(k), frames_(std::move(frames)) {
  k_.validate();
  for (const FrameBundle& f : frames_) f.validate(k_);
}

FrameBundle InMemorySequence::load(std::size_t index) const { return frames_.at(index); }

void EstimatorParams::validate() const {
  movable.validate();
  fusion.validate();
  if (!(splat.sharpness >= 0.0) || !(splat.coverage_eps >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "splat parameters must be non-negative");
  }
}

void mask_flow_by_view(FlowField& flow, const Mask& view_valid) {
  require_same_shape(flow.valid, view_valid, "mask_flow_by_view");
  const int w = flow.width();
  const int h = flow.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!flow.valid(x, y)) continue;
      const long tx = std::lround(x + flow.du(x, y));
      const long ty = std::lround(y + flow.dv(x, y));
      const bool ok = view_valid(x, y) && tx >= 0 && ty >= 0 && tx < w && ty < h &&
                      view_valid(static_cast<int>(tx), static_cast<int>(ty));
      if (!ok) flow.valid(x, y) = 0;
    }
  }
}

FrameEstimate estimate_frame(const FrameSource& source, std::size_t index, const FlowProvider& flow,
                             const EstimatorParams& params, bool keep_diagnostics) {
  params.validate();
  const Intrinsics& k = source.intrinsics();
  const FrameBundle current = source.load(index);
  current.validate(k);
  if (!current.pose) fail(ErrorKind::kInvalidArgument, "frame " + std::to_string(index) + " has no pose");

  FrameEstimate estimate;
  estimate.index = index;
  estimate.movable = movable_probability(current.rgb, current.background_rgb, params.movable);

  std::vector<int> offsets;
  for (int j : params.fusion.offsets) {
    offsets.push_back(j);
    offsets.push_back(-j);
  }

  std::vector<MotionMap> contributions;
  const PoseSE3 world_to_current = current.pose->inverse();
  for (int offset : offsets) {
    const long neighbor = static_cast<long>(index) + offset;
    if (neighbor < 0 || neighbor >= static_cast<long>(source.size())) continue;
    const FrameBundle other = source.load(static_cast<std::size_t>(neighbor));
    other.validate(k);
    if (!other.pose) fail(ErrorKind::kInvalidArgument, "frame " + std::to_string(neighbor) + " has no pose");
    const PoseSE3 current_from_other = world_to_current * *other.pose;

    SplattedFrame dyn_view = synthesize_view(other.rgb, other.depth, current_from_other, k, params.splat);
    SplattedFrame bg_view =
        synthesize_view(other.background_rgb, other.depth_for_background(), current_from_other, k, params.splat);

    FlowField dyn_flow = flow.compute({index, offset, false}, current.rgb, to_color_image(dyn_view.image, &dyn_view.valid));
    FlowField bg_flow =
        flow.compute({index, offset, true}, current.background_rgb, to_color_image(bg_view.image, &bg_view.valid));
    mask_flow_by_view(dyn_flow, dyn_view.valid);
    mask_flow_by_view(bg_flow, bg_view.valid);

    MotionMap motion = differenced_motion(dyn_flow, bg_flow);
    if (keep_diagnostics) {
      estimate.neighbors.push_back({offset, std::move(dyn_view), std::move(bg_view), motion});
    }
    contributions.push_back(std::move(motion));
  }

  if (contributions.empty()) {
    estimate.motion = MotionMap(k.width, k.height);
    std::fill(estimate.motion.valid.begin(), estimate.motion.valid.end(), std::uint8_t{0});
  } else {
    estimate.motion = temporal_average(contributions);
  }
  estimate.probability = final_probability(estimate.movable, estimate.motion, params.fusion);
  return estimate;
}

SequenceSummary estimate_sequence(const FrameSource& source, const FlowProvider& flow,
                                  const EstimatorParams& params, int jobs,
                                  const std::function<void(FrameEstimate&&)>& sink, bool keep_diagnostics,
                                  std::size_t first, std::size_t last) {
  params.validate();
  last = std::min(last, source.size());
  SequenceSummary summary;
  if (first >= last) return summary;

  std::atomic<std::size_t> next{first};
  std::mutex mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < last; i = next++) {
      try {
        FrameEstimate estimate = estimate_frame(source, i, flow, params, keep_diagnostics);
        const std::lock_guard lock(mutex);
        sink(std::move(estimate));
        ++summary.processed;
      } catch (const std::exception& e) {
        const std::lock_guard lock(mutex);
        summary.failures.push_back({i, e.what()});
      }
    }
  };

  const std::size_t count = last - first;
  const int threads = static_cast<int>(std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int n = 0; n < threads; ++n) pool.emplace_back(worker);
  }
  std::sort(summary.failures.begin(), summary.failures.end(),
            [](const FrameFailure& a, const FrameFailure& b) { return a.index < b.index; });
  return summary;
}

}  // namespace pixmotion
