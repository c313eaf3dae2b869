#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "pixmotion/flow.hpp"
#include "pixmotion/synthetic.hpp"
#include "test_support.hpp"

namespace pixmotion {
namespace {

TEST(FlowMagnitude, Basics) {
  FlowField f(3, 1);
  f.du(1, 0) = 3.0;
  f.dv(1, 0) = 4.0;
  f.valid(2, 0) = 0;
  const MotionMap m = flow_magnitude(f);
  EXPECT_EQ(m.values(0, 0), 0.0);
  EXPECT_EQ(m.values(1, 0), 5.0);
  EXPECT_EQ(m.valid(2, 0), 0);
}

TEST(FlowMagnitude, MatchesScalarOracle) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 5.0);
  FlowField f(30, 20);
  for (std::size_t i = 0; i < f.du.size(); ++i) {
    f.du[i] = n(rng);
    f.dv[i] = n(rng);
  }
  const MotionMap m = flow_magnitude(f);
  for (std::size_t i = 0; i < f.du.size(); ++i) {
    EXPECT_NEAR(m.values[i], std::sqrt(f.du[i] * f.du[i] + f.dv[i] * f.dv[i]), 1e-12);
  }
}

TEST(BaselineFlow, IdenticalImagesGiveExactZero) {
  const ColorImage a = testing::smooth_texture(80, 60);
  const FlowField f = baseline_flow(a, a);
  for (double v : f.du) EXPECT_EQ(v, 0.0);
  for (double v : f.dv) EXPECT_EQ(v, 0.0);
  for (auto v : f.valid) EXPECT_EQ(v, 1);
}

TEST(BaselineFlow, KnownShift) {
  const ColorImage a = testing::smooth_texture(96, 72);
  const ColorImage b = testing::smooth_texture(96, 72, 3.0, 0.0);  // content moves +3 px in x
  const FlowField f = baseline_flow(a, b);
  double err = 0.0;
  int n = 0;
  for (int y = 8; y < 64; ++y) {
    for (int x = 8; x < 85; ++x) {
      err += std::hypot(f.du(x, y) - 3.0, f.dv(x, y));
      ++n;
    }
  }
  EXPECT_LT(err / n, 0.5);
}

TEST(BaselineFlow, SubPixelShift) {
  const ColorImage a = testing::smooth_texture(96, 72);
  const ColorImage b = testing::smooth_texture(96, 72, 1.5, -2.5);
  const FlowField f = baseline_flow(a, b);
  double eu = 0.0;
  double ev = 0.0;
  int n = 0;
  for (int y = 8; y < 64; ++y) {
    for (int x = 8; x < 88; ++x) {
      eu += f.du(x, y) - 1.5;
      ev += f.dv(x, y) + 2.5;
      ++n;
    }
  }
  EXPECT_LT(std::abs(eu / n), 0.3);
  EXPECT_LT(std::abs(ev / n), 0.3);
}

TEST(BaselineFlow, Deterministic) {
  const ColorImage a = testing::smooth_texture(64, 48);
  const ColorImage b = testing::smooth_texture(64, 48, 2.0, 1.0);
  EXPECT_TRUE(baseline_flow(a, b) == baseline_flow(a, b));
}

TEST(BaselineFlow, MovingBlobOnSyntheticScene) {
  SyntheticScene scene = SyntheticScene::desk_preset();
  scene.camera.linear_velocity.setZero();
  scene.camera.angular_velocity.setZero();
  const SyntheticRenderer r(scene);
  const RenderedView a = r.render(10, true);
  const RenderedView b = r.render(12, true);
  const FlowField gt = r.residual_flow(10, 2);
  const FlowField f = baseline_flow(a.rgb, b.rgb);
  double est = 0.0;
  double truth = 0.0;
  int n = 0;
  for (int y = 0; y < a.rgb.height(); ++y) {
    for (int x = 0; x < a.rgb.width(); ++x) {
      if (!a.moving_mask(x, y)) continue;
      est += std::hypot(f.du(x, y), f.dv(x, y));
      truth += std::hypot(gt.du(x, y), gt.dv(x, y));
      ++n;
    }
  }
  ASSERT_GT(n, 100);
  EXPECT_NEAR(est / n, truth / n, 0.3 * truth / n);
}

TEST(BaselineFlow, ShapeMismatch) {
  EXPECT_THROW((void)baseline_flow(ColorImage(8, 8), ColorImage(9, 8)), Error);
}

TEST(FloFile, RoundTripAndInvalidMarker) {
  const auto dir = testing::scratch_dir("flo");
  FlowField f(7, 5);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> u(-20.0f, 20.0f);
  for (std::size_t i = 0; i < f.du.size(); ++i) {
    f.du[i] = u(rng);
    f.dv[i] = u(rng);
  }
  f.valid(3, 2) = 0;
  write_flo(dir / "a.flo", f);
  const FlowField g = read_flo(dir / "a.flo");
  ASSERT_EQ(g.width(), 7);
  ASSERT_EQ(g.height(), 5);
  for (std::size_t i = 0; i < f.du.size(); ++i) {
    EXPECT_EQ(g.valid[i], f.valid[i]);
    if (!f.valid[i]) continue;
    EXPECT_EQ(g.du[i], f.du[i]);
    EXPECT_EQ(g.dv[i], f.dv[i]);
  }
}

TEST(FloFile, ByteLayout) {
  const auto dir = testing::scratch_dir("flo_bytes");
  FlowField f(2, 1);
  f.du(0, 0) = 1.5;
  f.dv(0, 0) = -2.0;
  f.du(1, 0) = 0.25;
  f.dv(1, 0) = 8.0;
  write_flo(dir / "b.flo", f);
  std::ifstream in(dir / "b.flo", std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  EXPECT_EQ(std::string(magic, 4), "PIEH");
  std::int32_t w = 0;
  std::int32_t h = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  EXPECT_EQ(w, 2);
  EXPECT_EQ(h, 1);
  float v[4];
  in.read(reinterpret_cast<char*>(v), sizeof v);
  EXPECT_EQ(v[0], 1.5f);
  EXPECT_EQ(v[1], -2.0f);
  EXPECT_EQ(v[2], 0.25f);
  EXPECT_EQ(v[3], 8.0f);
}

TEST(FloFile, BadMagic) {
  const auto dir = testing::scratch_dir("flo_bad");
  std::ofstream(dir / "c.flo", std::ios::binary) << "XXXXXXXXXXXX";
  EXPECT_THROW((void)read_flo(dir / "c.flo"), Error);
  EXPECT_THROW((void)read_flo(dir / "missing.flo"), Error);
}

TEST(FileFlowProvider, NamingAndLoad) {
  EXPECT_EQ(FileFlowProvider::file_name({12, -2, true}), "000012_bg_m2.flo");
  EXPECT_EQ(FileFlowProvider::file_name({3, 1, false}), "000003_dyn_p1.flo");
  const auto dir = testing::scratch_dir("flow_provider");
  FlowField f(4, 3);
  f.du(1, 1) = 2.0;
  write_flo(dir / "000005_dyn_p2.flo", f);
  const FileFlowProvider p(dir);
  const FlowField g = p.compute({5, 2, false}, ColorImage(4, 3), ColorImage(4, 3));
  EXPECT_EQ(g.du(1, 1), 2.0);
  EXPECT_THROW((void)p.compute({5, 2, false}, ColorImage(5, 3), ColorImage(5, 3)), Error);
  EXPECT_THROW((void)p.compute({6, 2, false}, ColorImage(4, 3), ColorImage(4, 3)), Error);
}

}  // namespace
}  // namespace pixmotion
