#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "pixmotion/flow.hpp"
#include "pixmotion/motion_fusion.hpp"
#include "pixmotion/movable.hpp"
#include "pixmotion/view_synthesis.hpp"

namespace pixmotion {

// Random access to the frames of a sequence. Implementations must allow
// concurrent load() calls.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  [[nodiscard]] virtual std::size_t size() const = 0;
  [[nodiscard]] virtual const Intrinsics& intrinsics() const = 0;
  [[nodiscard]] virtual FrameBundle load(std::size_t index) const = 0;
};

class InMemorySequence final : public FrameSource {
 public:
  InMemorySequence(Intrinsics k, std::vector<FrameBundle> frames);

  [[nodiscard]] std::size_t size() const override { return frames_.size(); }
  [[nodiscard]] const Intrinsics& intrinsics() const override { return k_; }
  [[nodiscard]] FrameBundle load(std::size_t index) const override;
  [[nodiscard]] const FrameBundle& at(std::size_t index) const { return frames_.at(index); }

 private:
  Intrinsics k_;
  std::vector<FrameBundle> frames_;
};

struct EstimatorParams {
  MovableParams movable;
  FusionParams fusion;
  SplatParams splat;

  void validate() const;
};

// Intermediate products for one neighbour t + offset.
struct NeighborDiagnostics {
  int offset = 0;
  SplattedFrame dynamic_view;
  SplattedFrame background_view;
  MotionMap motion;  // differenced motion for this neighbour
};

struct FrameEstimate {
  std::size_t index = 0;
  ProbabilityMap movable;       // p_m
  MotionMap motion;             // temporally averaged differenced motion M^t
  ProbabilityMap probability;   // P^t
  std::vector<NeighborDiagnostics> neighbors;  // filled only on request
};

// Restricts a flow to pixels whose own location and matched location are
// both covered by the synthesised view.
void mask_flow_by_view(FlowField& flow, const Mask& view_valid);

// Full per-frame estimate for frame `index`. Neighbours outside the sequence
// are skipped; a frame with no neighbours at all gets P = p_m. Requires
// ground-truth (or externally estimated) poses on every frame involved.
FrameEstimate estimate_frame(const FrameSource& source, std::size_t index, const FlowProvider& flow,
                             const EstimatorParams& params, bool keep_diagnostics = false);

struct FrameFailure {
  std::size_t index = 0;
  std::string message;
};

struct SequenceSummary {
  std::size_t processed = 0;
  std::vector<FrameFailure> failures;
};

// Runs estimate_frame over [first, last) using `jobs` worker threads. Each
// frame is independent, so results do not depend on the job count. `sink` is
// invoked once per successful frame, serialised by an internal mutex, in
// completion order.
SequenceSummary estimate_sequence(const FrameSource& source, const FlowProvider& flow,
                                  const EstimatorParams& params, int jobs,
                                  const std::function<void(FrameEstimate&&)>& sink,
                                  bool keep_diagnostics = false, std::size_t first = 0,
                                  std::size_t last = static_cast<std::size_t>(-1));

}  // namespace pixmotion
