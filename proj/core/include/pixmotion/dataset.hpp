#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pixmotion/pipeline.hpp"

namespace pixmotion {

struct ManifestFrame {
  double timestamp = 0.0;
  // Paths are relative to the manifest root.
  std::filesystem::path rgb;
  std::filesystem::path depth;
  std::filesystem::path background_rgb;
  std::optional<std::filesystem::path> background_depth;
  std::optional<PoseSE3> pose;  // camera-to-world

  bool operator==(const ManifestFrame& other) const;
};

struct SequenceManifest {
  std::filesystem::path root;
  Intrinsics intrinsics = tum_fr3_intrinsics();
  double depth_scale = 5000.0;
  std::vector<ManifestFrame> frames;
  std::size_t dropped_frames = 0;  // rgb frames without a depth partner

  // Strictly increasing timestamps, valid intrinsics and (when
  // `check_files`) every referenced file present under root.
  void validate(bool check_files = true) const;

  bool operator==(const SequenceManifest& other) const;
};

struct TumLoadOptions {
  double max_time_gap = 0.02;
  Intrinsics intrinsics = tum_fr3_intrinsics();
  double depth_scale = 5000.0;
  // Static-background images live under root/background_dir with the same
  // relative file names as the dynamic frames.
  std::filesystem::path background_dir = "background";
};

// Reads rgb.txt, depth.txt and (optionally) groundtruth.txt from `root`,
// associates rgb with depth by nearest timestamp, and attaches the nearest
// ground-truth pose within the same gap. Throws kIo for missing index files
// or referenced images and kInvalidArgument when nothing associates.
SequenceManifest load_tum_sequence(const std::filesystem::path& root, const TumLoadOptions& options = {});

// One "timestamp value..." record from a TUM index file.
struct IndexEntry {
  double timestamp = 0.0;
  std::vector<std::string> fields;
};
std::vector<IndexEntry> read_tum_index(const std::filesystem::path& path);

// Lossless line-oriented text form (paths quoted, doubles at round-trip precision).
void write_manifest(std::ostream& out, const SequenceManifest& manifest);
void write_manifest(const std::filesystem::path& path, const SequenceManifest& manifest);
SequenceManifest read_manifest(std::istream& in);
// The root defaults to the manifest file's directory unless the file sets one.
SequenceManifest read_manifest(const std::filesystem::path& path);

// Frames decoded from disk on demand; safe for concurrent loads.
class ManifestSource final : public FrameSource {
 public:
  explicit ManifestSource(SequenceManifest manifest);

  [[nodiscard]] std::size_t size() const override { return manifest_.frames.size(); }
  [[nodiscard]] const Intrinsics& intrinsics() const override { return manifest_.intrinsics; }
  [[nodiscard]] FrameBundle load(std::size_t index) const override;
  [[nodiscard]] const SequenceManifest& manifest() const noexcept { return manifest_; }

 private:
  SequenceManifest manifest_;
};

// Writes a sequence in TUM layout (rgb/, depth/, background/rgb,
// background/depth, rgb.txt, depth.txt, groundtruth.txt when poses are
// present) and returns the matching manifest.
SequenceManifest write_tum_sequence(const std::filesystem::path& root, const Intrinsics& k,
                                    const std::vector<FrameBundle>& frames, double depth_scale = 5000.0);

}  // namespace pixmotion
