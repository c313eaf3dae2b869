#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pixmotion/synthetic.hpp"
#include "pixmotion/view_synthesis.hpp"
#include "test_support.hpp"

namespace pixmotion {
namespace {

const Intrinsics kCam{60.0, 60.0, 31.5, 23.5, 64, 48};

DepthMap constant_depth(int w, int h, double z) {
  DepthMap d(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) d.set(x, y, z);
  }
  return d;
}

DepthMap bumpy_depth(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1.5, 4.0);
  DepthMap d(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if ((x * 7 + y * 3) % 23 == 0) continue;  // a few holes
      d.set(x, y, 2.0 + 0.5 * std::sin(0.2 * x) * std::cos(0.15 * y) + 0.01 * u(rng));
    }
  }
  return d;
}

TEST(Reproject, IdentityIsExact) {
  std::mt19937_64 rng(1);
  const DepthMap d = bumpy_depth(kCam.width, kCam.height, rng);
  const ReprojectedCoords rc = reproject_coords(d, PoseSE3::identity(), kCam);
  for (int y = 0; y < kCam.height; ++y) {
    for (int x = 0; x < kCam.width; ++x) {
      EXPECT_EQ(rc.valid(x, y), d.valid(x, y));
      if (!rc.valid(x, y)) continue;
      EXPECT_NEAR(rc.coords(x, y).x(), x, 1e-12);
      EXPECT_NEAR(rc.coords(x, y).y(), y, 1e-12);
      EXPECT_EQ(rc.depth(x, y), d.values(x, y));
    }
  }
}

TEST(Reproject, ForwardMotionScalesAboutPrincipalPoint) {
  const double plane = 3.0;
  const double tz = 0.5;
  const DepthMap d = constant_depth(kCam.width, kCam.height, plane);
  const ReprojectedCoords rc = reproject_coords(d, PoseSE3(Eigen::Matrix3d::Identity(), {0.0, 0.0, -tz}), kCam);
  const double s = plane / (plane - tz);
  for (int y = 0; y < kCam.height; y += 5) {
    for (int x = 0; x < kCam.width; x += 3) {
      EXPECT_NEAR(rc.coords(x, y).x(), kCam.cx + (x - kCam.cx) * s, 1e-9);
      EXPECT_NEAR(rc.coords(x, y).y(), kCam.cy + (y - kCam.cy) * s, 1e-9);
      EXPECT_NEAR(rc.depth(x, y), plane - tz, 1e-12);
    }
  }
}

TEST(Reproject, MatchesMatrixOracle) {
  std::mt19937_64 rng(2);
  const DepthMap d = bumpy_depth(kCam.width, kCam.height, rng);
  const Eigen::Matrix3d K = kCam.matrix();
  const Eigen::Matrix3d Kinv = K.inverse();
  for (int trial = 0; trial < 5; ++trial) {
    const PoseSE3 pose(testing::random_rotation(rng, 0.1), {0.1 * trial, -0.05, 0.02 * trial});
    const ReprojectedCoords rc = reproject_coords(d, pose, kCam);
    for (int y = 0; y < kCam.height; ++y) {
      for (int x = 0; x < kCam.width; ++x) {
        if (!d.valid(x, y)) {
          EXPECT_EQ(rc.valid(x, y), 0);
          continue;
        }
        const Eigen::Vector3d X = Kinv * Eigen::Vector3d(x, y, 1.0) * d.values(x, y);
        const Eigen::Vector3d q = K * (pose.rotation() * X + pose.translation());
        ASSERT_EQ(rc.valid(x, y), 1);
        EXPECT_NEAR(rc.coords(x, y).x(), q.x() / q.z(), 1e-9);
        EXPECT_NEAR(rc.coords(x, y).y(), q.y() / q.z(), 1e-9);
      }
    }
  }
}

TEST(Reproject, BehindCameraFlagged) {
  const DepthMap d = constant_depth(kCam.width, kCam.height, 1.0);
  const ReprojectedCoords rc = reproject_coords(d, PoseSE3(Eigen::Matrix3d::Identity(), {0, 0, -2.0}), kCam);
  for (auto v : rc.valid) EXPECT_EQ(v, 0);
}

TEST(Splat, IdentityReconstructsSource) {
  std::mt19937_64 rng(3);
  const ColorImage src = testing::random_image(kCam.width, kCam.height, rng);
  const SplattedFrame s =
      synthesize_view(src, constant_depth(kCam.width, kCam.height, 2.0), PoseSE3::identity(), kCam);
  Mask interior(kCam.width, kCam.height, 0);
  for (int y = 1; y < kCam.height - 1; ++y) {
    for (int x = 1; x < kCam.width - 1; ++x) interior(x, y) = 1;
  }
  EXPECT_GT(psnr(s.image, to_real_image(src), &interior), 40.0);
  for (auto v : s.valid) EXPECT_EQ(v, 1);
}

TEST(Splat, TwoSourcesClosedForm) {
  ColorImage src(3, 1);
  src(0, 0) = {200, 10, 10};  // A, near
  src(1, 0) = {10, 10, 200};  // B, far
  ReprojectedCoords rc{Grid<Pixel>(3, 1, Pixel::Zero()), ScalarGrid(3, 1, 0.0), Mask(3, 1, 0)};
  rc.coords(0, 0) = {2.0, 0.0};
  rc.coords(1, 0) = {2.0, 0.0};
  rc.depth(0, 0) = 1.0;
  rc.depth(1, 0) = 2.0;
  rc.valid(0, 0) = 1;
  rc.valid(1, 0) = 1;
  double prev_err = 1e9;
  for (double sharpness : {1.0, 5.0, 10.0, 40.0}) {
    SplatParams p;
    p.sharpness = sharpness;
    const SplattedFrame s = softmax_splat(src, rc, p);
    // Median of {1, 2} is 1.5.
    const double wa = std::exp(-sharpness * 1.0 / 1.5);
    const double wb = std::exp(-sharpness * 2.0 / 1.5);
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(s.image(2, 0)[c], (wa * src(0, 0)[c] + wb * src(1, 0)[c]) / (wa + wb), 1e-9);
    }
    EXPECT_EQ(s.coverage(2, 0), 2.0);
    const double err = std::abs(s.image(2, 0)[0] - 200.0);
    EXPECT_LT(err, prev_err);
    prev_err = err;
    EXPECT_EQ(s.valid(0, 0), 0);
    EXPECT_EQ(s.valid(1, 0), 0);
  }
  EXPECT_LT(prev_err, 1e-6);
}

TEST(Splat, ConvexCombinationProperty) {
  std::mt19937_64 rng(4);
  const ColorImage src = testing::random_image(kCam.width, kCam.height, rng, 40, 220);
  const DepthMap d = bumpy_depth(kCam.width, kCam.height, rng);
  double lo[3] = {255, 255, 255};
  double hi[3] = {0, 0, 0};
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!d.valid[i]) continue;
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], double(src[i][c]));
      hi[c] = std::max(hi[c], double(src[i][c]));
    }
  }
  for (int trial = 0; trial < 5; ++trial) {
    const PoseSE3 pose(testing::random_rotation(rng, 0.05), {0.05 * trial, 0.02, -0.03});
    const SplattedFrame s = synthesize_view(src, d, pose, kCam);
    for (std::size_t i = 0; i < s.image.size(); ++i) {
      if (!s.valid[i]) {
        EXPECT_LE(s.coverage[i], SplatParams{}.coverage_eps);
        continue;
      }
      for (int c = 0; c < 3; ++c) {
        ASSERT_TRUE(std::isfinite(s.image[i][c]));
        EXPECT_GE(s.image[i][c], lo[c] - 1e-9);
        EXPECT_LE(s.image[i][c], hi[c] + 1e-9);
      }
    }
  }
}

TEST(Splat, CoverageMassConserved) {
  std::mt19937_64 rng(5);
  const ColorImage src = testing::random_image(kCam.width, kCam.height, rng);
  const DepthMap d = bumpy_depth(kCam.width, kCam.height, rng);
  const PoseSE3 pose(testing::random_rotation(rng, 0.05), {0.1, -0.05, 0.05});
  const ReprojectedCoords rc = reproject_coords(d, pose, kCam);
  const SplattedFrame s = softmax_splat(src, rc);
  double expected = 0.0;
  for (std::size_t i = 0; i < rc.coords.size(); ++i) {
    if (!rc.valid[i]) continue;
    const double x = rc.coords[i].x();
    const double y = rc.coords[i].y();
    for (int ty = static_cast<int>(std::floor(y)); ty <= static_cast<int>(std::floor(y)) + 1; ++ty) {
      for (int tx = static_cast<int>(std::floor(x)); tx <= static_cast<int>(std::floor(x)) + 1; ++tx) {
        if (tx < 0 || ty < 0 || tx >= kCam.width || ty >= kCam.height) continue;
        expected += std::max(0.0, 1.0 - std::abs(x - tx)) * std::max(0.0, 1.0 - std::abs(y - ty));
      }
    }
  }
  double total = 0.0;
  for (double c : s.coverage) total += c;
  EXPECT_NEAR(total, expected, 1e-6);
}

TEST(Splat, DeterministicAcrossRuns) {
  std::mt19937_64 rng(6);
  const ColorImage src = testing::random_image(kCam.width, kCam.height, rng);
  const DepthMap d = bumpy_depth(kCam.width, kCam.height, rng);
  const PoseSE3 pose(testing::random_rotation(rng, 0.05), {0.1, -0.05, 0.05});
  const SplattedFrame a = synthesize_view(src, d, pose, kCam);
  const SplattedFrame b = synthesize_view(src, d, pose, kCam);
  EXPECT_TRUE(a.image == b.image);
  EXPECT_TRUE(a.coverage == b.coverage);
}

TEST(Splat, RoundTripOnSyntheticScene) {
  SyntheticScene scene = SyntheticScene::desk_preset();
  scene.moving_boxes.clear();
  const SyntheticRenderer r(scene);
  const RenderedView target = r.render(10, false);
  const RenderedView source = r.render(12, false);
  const PoseSE3 rel = r.camera_pose(10).inverse() * r.camera_pose(12);
  const SplattedFrame s = synthesize_view(source.rgb, source.depth, rel, scene.intrinsics);
  EXPECT_LT(mean_abs_difference(s.image, to_real_image(target.rgb), &s.valid), 2.0);
}

TEST(Homography, IdentityIsExact) {
  std::mt19937_64 rng(7);
  const ColorImage src = testing::random_image(20, 15, rng);
  const WarpedFrame w = homography_warp(src, Eigen::Matrix3d::Identity());
  EXPECT_TRUE(w.image == to_real_image(src));
}

TEST(Homography, Translation) {
  std::mt19937_64 rng(8);
  const ColorImage src = testing::random_image(20, 15, rng);
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 2) = 5.0;
  const WarpedFrame w = homography_warp(src, h);
  for (int y = 0; y < 15; ++y) {
    for (int x = 0; x < 20; ++x) {
      if (x < 5) {
        EXPECT_EQ(w.valid(x, y), 0);
        continue;
      }
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(w.image(x, y)[c], src(x - 5, y)[c], 1e-12);
    }
  }
}

TEST(Homography, SingularThrows) {
  try {
    (void)homography_warp(ColorImage(4, 4), Eigen::Matrix3d::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

TEST(Homography, PlaneInducedMatchesReprojectionOnPlane) {
  const double plane = 2.5;
  const DepthMap d = constant_depth(kCam.width, kCam.height, plane);
  std::mt19937_64 rng(9);
  const PoseSE3 pose(testing::random_rotation(rng, 0.05), {0.1, 0.02, -0.1});
  // Plane z = d in the source camera: n = (0,0,1), n.X = d.
  const Eigen::Matrix3d H = plane_induced_homography(kCam, pose, {0.0, 0.0, 1.0}, plane);
  const ReprojectedCoords rc = reproject_coords(d, pose, kCam);
  for (int y = 0; y < kCam.height; y += 4) {
    for (int x = 0; x < kCam.width; x += 4) {
      const Eigen::Vector3d q = H * Eigen::Vector3d(x, y, 1.0);
      EXPECT_NEAR(q.x() / q.z(), rc.coords(x, y).x(), 1e-9);
      EXPECT_NEAR(q.y() / q.z(), rc.coords(x, y).y(), 1e-9);
    }
  }
}

TEST(Homography, SplattingBeatsHomographyOnNonPlanarScene) {
  SyntheticScene scene = SyntheticScene::desk_preset();
  scene.moving_boxes.clear();
  const SyntheticRenderer r(scene);
  const RenderedView target = r.render(20, false);
  const RenderedView source = r.render(22, false);
  const PoseSE3 rel = r.camera_pose(20).inverse() * r.camera_pose(22);
  const SplattedFrame s = synthesize_view(source.rgb, source.depth, rel, scene.intrinsics);
  const WarpedFrame h = homography_warp(
      source.rgb, plane_induced_homography(scene.intrinsics, rel, {0, 0, 1}, median_depth(source.depth)));
  Mask both(s.valid.width(), s.valid.height(), 0);
  for (std::size_t i = 0; i < both.size(); ++i) both[i] = s.valid[i] && h.valid[i];
  const RealImage t = to_real_image(target.rgb);
  EXPECT_LT(mean_abs_difference(s.image, t, &both), mean_abs_difference(h.image, t, &both));
}

TEST(MedianDepth, OddEvenEmpty) {
  DepthMap d(4, 1);
  EXPECT_EQ(median_depth(d), 0.0);
  d.set(0, 0, 3.0);
  d.set(1, 0, 1.0);
  d.set(2, 0, 2.0);
  EXPECT_EQ(median_depth(d), 2.0);
  d.set(3, 0, 10.0);
  EXPECT_EQ(median_depth(d), 2.5);
}

}  // namespace
}  // namespace pixmotion
