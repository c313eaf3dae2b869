#pragma once

#include <filesystem>

#include "pixmotion/frame.hpp"

namespace pixmotion {

// 8-bit RGB image files (any format the codec backend supports, PNG by
// default). Grayscale inputs are expanded to three channels.
ColorImage read_color_image(const std::filesystem::path& path);
void write_color_image(const std::filesystem::path& path, const ColorImage& image);

// 16-bit single-channel depth, meters = raw / scale, raw 0 -> invalid.
DepthMap load_depth_png(const std::filesystem::path& path, double scale = 5000.0);
// Inverse of load_depth_png; values are rounded to the nearest raw unit and
// saturate at 65535.
void write_depth_png(const std::filesystem::path& path, const DepthMap& depth, double scale = 5000.0);

// Raw-value conversion shared by the reader (exposed for testing).
DepthMap depth_from_raw(const Grid<std::uint16_t>& raw, double scale);

// 8-bit grayscale, value = round(255 * clamp(v, 0, 1)).
void write_probability_png(const std::filesystem::path& path, const ScalarGrid& values);
Grid<std::uint8_t> quantize_probability(const ScalarGrid& values);

void write_mask_png(const std::filesystem::path& path, const Mask& mask);
Mask read_mask_png(const std::filesystem::path& path);

// Float grid: magic "PGRD", int32 width, int32 height (little endian), then
// width*height float32 values in row-major order.
void write_float_grid(const std::filesystem::path& path, const ScalarGrid& values);
ScalarGrid read_float_grid(const std::filesystem::path& path);

}  // namespace pixmotion
