#include "pixmotion/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace pixmotion {

void DepthMap::set(int x, int y, double depth) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    fail(ErrorKind::kInvalidDepth, "depth must be positive and finite");
  }
  values(x, y) = depth;
  valid(x, y) = 1;
}

void DepthMap::validate() const {
  require_same_shape(values, valid, "depth map");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (valid[i] && !(values[i] > 0.0 && std::isfinite(values[i]))) {
      fail(ErrorKind::kInvalidDepth, "depth map holds a non-positive valid value");
    }
  }
}

void FrameBundle::validate(const Intrinsics& k) const {
  auto check = [&](int w, int h, const char* what) {
    if (w != k.width || h != k.height) {
      fail(ErrorKind::kDimensionMismatch, std::string("frame ") + what + " does not match intrinsics");
    }
  };
  check(rgb.width(), rgb.height(), "rgb");
  check(depth.width(), depth.height(), "depth");
  check(background_rgb.width(), background_rgb.height(), "background rgb");
  if (background_depth) check(background_depth->width(), background_depth->height(), "background depth");
}

namespace {

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

void imwrite_or_throw(const std::filesystem::path& path, const cv::Mat& mat) {
  ensure_parent(path);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    fail(ErrorKind::kIo, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) fail(ErrorKind::kIo, "cannot write " + path.string());
}

cv::Mat imread_or_throw(const std::filesystem::path& path, int flags) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::kIo, "missing file " + path.string());
  cv::Mat mat = cv::imread(path.string(), flags);
  if (mat.empty()) fail(ErrorKind::kFormat, "cannot decode image " + path.string());
  return mat;
}

}  // namespace

ColorImage read_color_image(const std::filesystem::path& path) {
  cv::Mat mat = imread_or_throw(path, cv::IMREAD_COLOR);
  if (mat.depth() != CV_8U) fail(ErrorKind::kFormat, path.string() + ": expected 8-bit image");
  ColorImage image(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x) image(x, y) = {row[x][2], row[x][1], row[x][0]};
  }
  return image;
}

void write_color_image(const std::filesystem::path& path, const ColorImage& image) {
  cv::Mat mat(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      const Rgb8& c = image(x, y);
      row[x] = {c.b, c.g, c.r};
    }
  }
  imwrite_or_throw(path, mat);
}

DepthMap depth_from_raw(const Grid<std::uint16_t>& raw, double scale) {
  if (!(scale > 0.0)) fail(ErrorKind::kInvalidArgument, "depth scale must be positive");
  DepthMap depth(raw.width(), raw.height());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == 0) continue;
    depth.values[i] = raw[i] / scale;
    depth.valid[i] = 1;
  }
  return depth;
}

DepthMap load_depth_png(const std::filesystem::path& path, double scale) {
  cv::Mat mat = imread_or_throw(path, cv::IMREAD_UNCHANGED);
  if (mat.type() != CV_16UC1) {
    fail(ErrorKind::kFormat, path.string() + ": expected 16-bit single-channel depth image");
  }
  Grid<std::uint16_t> raw(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint16_t>(y);
    for (int x = 0; x < mat.cols; ++x) raw(x, y) = row[x];
  }
  return depth_from_raw(raw, scale);
}

void write_depth_png(const std::filesystem::path& path, const DepthMap& depth, double scale) {
  cv::Mat mat(depth.height(), depth.width(), CV_16UC1, cv::Scalar(0));
  for (int y = 0; y < depth.height(); ++y) {
    auto* row = mat.ptr<std::uint16_t>(y);
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.is_valid(x, y)) continue;
      const long raw = std::lround(depth.values(x, y) * scale);
      row[x] = static_cast<std::uint16_t>(std::clamp(raw, 1L, 65535L));
    }
  }
  imwrite_or_throw(path, mat);
}

Grid<std::uint8_t> quantize_probability(const ScalarGrid& values) {
  Grid<std::uint8_t> out(values.width(), values.height());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? std::clamp(values[i], 0.0, 1.0) : 0.0;
    out[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return out;
}

namespace {

void write_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& g) {
  cv::Mat mat(g.height(), g.width(), CV_8UC1);
  for (int y = 0; y < g.height(); ++y) {
    std::memcpy(mat.ptr<std::uint8_t>(y), &g(0, y), static_cast<std::size_t>(g.width()));
  }
  imwrite_or_throw(path, mat);
}

}  // namespace

void write_probability_png(const std::filesystem::path& path, const ScalarGrid& values) {
  write_gray8(path, quantize_probability(values));
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  Grid<std::uint8_t> g(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) g[i] = mask[i] ? 255 : 0;
  write_gray8(path, g);
}

Mask read_mask_png(const std::filesystem::path& path) {
  cv::Mat mat = imread_or_throw(path, cv::IMREAD_GRAYSCALE);
  Mask mask(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) mask(x, y) = row[x] >= 128 ? 1 : 0;
  }
  return mask;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary grid/flow I/O assumes a little-endian host");

}  // namespace

void write_float_grid(const std::filesystem::path& path, const ScalarGrid& values) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  const std::int32_t dims[2] = {values.width(), values.height()};
  out.write("PGRD", 4);
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  std::vector<float> row(static_cast<std::size_t>(values.width()));
  for (int y = 0; y < values.height(); ++y) {
    for (int x = 0; x < values.width(); ++x) row[x] = static_cast<float>(values(x, y));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

ScalarGrid read_float_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  char magic[4];
  std::int32_t dims[2];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, "PGRD", 4) != 0) fail(ErrorKind::kFormat, path.string() + ": bad grid header");
  if (dims[0] < 0 || dims[1] < 0 || dims[0] > 1 << 15 || dims[1] > 1 << 15) {
    fail(ErrorKind::kFormat, path.string() + ": implausible grid size");
  }
  ScalarGrid values(dims[0], dims[1]);
  std::vector<float> row(static_cast<std::size_t>(dims[0]));
  for (int y = 0; y < dims[1]; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) fail(ErrorKind::kFormat, path.string() + ": truncated grid");
    for (int x = 0; x < dims[0]; ++x) values(x, y) = row[x];
  }
  return values;
}

}  // namespace pixmotion
