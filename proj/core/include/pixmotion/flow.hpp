#pragma once

#include <filesystem>
#include <string>

#include "pixmotion/grid.hpp"

namespace pixmotion {

// Dense displacement: pixel (x, y) of the first image matches
// (x + du, y + dv) in the second.
struct FlowField {
  ScalarGrid du;
  ScalarGrid dv;
  Mask valid;

  FlowField() = default;
  FlowField(int width, int height) : du(width, height, 0.0), dv(width, height, 0.0), valid(width, height, 1) {}

  [[nodiscard]] int width() const noexcept { return du.width(); }
  [[nodiscard]] int height() const noexcept { return du.height(); }

  bool operator==(const FlowField&) const = default;
};

// Per-pixel Euclidean norm; `valid` follows the flow's mask.
struct MotionMap {
  ScalarGrid values;
  Mask valid;

  MotionMap() = default;
  MotionMap(int width, int height) : values(width, height, 0.0), valid(width, height, 1) {}
};

MotionMap flow_magnitude(const FlowField& flow);

struct BaselineFlowParams {
  int patch_radius = 3;     // 7x7 SSD window
  int coarse_radius = 4;    // exhaustive search at the coarsest level
  int refine_radius = 2;    // search around the upsampled estimate
  int max_levels = 4;
  int min_level_size = 16;  // stop building the pyramid below this
  bool median_filter = true;
};

// Coarse-to-fine integer block matching with parabolic sub-pixel refinement
// and a 3x3 median regulariser per level. Bit-identical inputs give an
// exact zero field. Flow is invalid where the match leaves the image.
FlowField baseline_flow(const ColorImage& a, const ColorImage& b, const BaselineFlowParams& params = {});

// Identifies one flow computation inside the estimation pipeline:
// frame t against the view synthesised from frame t + offset.
struct FlowQuery {
  std::size_t frame = 0;
  int offset = 0;
  bool background = false;
};

// Produces the flow from `current` to `synthesized`. Implementations must be
// deterministic and safe to call concurrently.
class FlowProvider {
 public:
  virtual ~FlowProvider() = default;
  virtual FlowField compute(const FlowQuery& query, const ColorImage& current,
                            const ColorImage& synthesized) const = 0;
};

class BaselineFlowProvider final : public FlowProvider {
 public:
  explicit BaselineFlowProvider(BaselineFlowParams params = {}) : params_(params) {}
  FlowField compute(const FlowQuery& query, const ColorImage& current,
                    const ColorImage& synthesized) const override;

 private:
  BaselineFlowParams params_;
};

// Reads precomputed flows named `{frame:06}_{dyn|bg}_{p|m}{|offset|}.flo`
// from a directory, e.g. 000012_bg_m2.flo for frame 12 against frame 10.
class FileFlowProvider final : public FlowProvider {
 public:
  explicit FileFlowProvider(std::filesystem::path directory) : directory_(std::move(directory)) {}
  FlowField compute(const FlowQuery& query, const ColorImage& current,
                    const ColorImage& synthesized) const override;

  static std::string file_name(const FlowQuery& query);

 private:
  std::filesystem::path directory_;
};

// Middlebury .flo: "PIEH", int32 width, int32 height, then interleaved
// float32 (du, dv) row-major, little endian. Components above 1e9 mark
// unknown flow and are read back as invalid.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

}  // namespace pixmotion
