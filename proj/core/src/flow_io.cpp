#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pixmotion/flow.hpp"

namespace pixmotion {

namespace {

constexpr float kUnknownFlow = 1e10f;
constexpr float kUnknownThreshold = 1e9f;

}  // namespace

FlowField read_flo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open flow file " + path.string());
  char magic[4];
  std::int32_t dims[2];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, "PIEH", 4) != 0) {
    fail(ErrorKind::kFormat, path.string() + ": missing PIEH header");
  }
  if (dims[0] <= 0 || dims[1] <= 0 || dims[0] > 1 << 15 || dims[1] > 1 << 15) {
    fail(ErrorKind::kFormat, path.string() + ": implausible flow size");
  }
  FlowField flow(dims[0], dims[1]);
  std::vector<float> row(2 * static_cast<std::size_t>(dims[0]));
  for (int y = 0; y < dims[1]; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) fail(ErrorKind::kFormat, path.string() + ": truncated flow data");
    for (int x = 0; x < dims[0]; ++x) {
      const float u = row[2 * x];
      const float v = row[2 * x + 1];
      if (!std::isfinite(u) || !std::isfinite(v) || std::abs(u) > kUnknownThreshold ||
          std::abs(v) > kUnknownThreshold) {
        flow.valid(x, y) = 0;
        continue;
      }
      flow.du(x, y) = u;
      flow.dv(x, y) = v;
    }
  }
  return flow;
}

void write_flo(const std::filesystem::path& path, const FlowField& flow) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  const std::int32_t dims[2] = {flow.width(), flow.height()};
  out.write("PIEH", 4);
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  std::vector<float> row(2 * static_cast<std::size_t>(flow.width()));
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      const bool ok = flow.valid(x, y) != 0;
      row[2 * x] = ok ? static_cast<float>(flow.du(x, y)) : kUnknownFlow;
      row[2 * x + 1] = ok ? static_cast<float>(flow.dv(x, y)) : kUnknownFlow;
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

std::string FileFlowProvider::file_name(const FlowQuery& query) {
  std::ostringstream name;
  name << std::setw(6) << std::setfill('0') << query.frame << '_' << (query.background ? "bg" : "dyn") << '_'
       << (query.offset >= 0 ? 'p' : 'm') << std::abs(query.offset) << ".flo";
  return name.str();
}

FlowField FileFlowProvider::compute(const FlowQuery& query, const ColorImage& current,
                                    const ColorImage& /*synthesized*/) const {
  FlowField flow = read_flo(directory_ / file_name(query));
  require_same_shape(flow.du, current, "precomputed flow");
  return flow;
}

}  // namespace pixmotion
