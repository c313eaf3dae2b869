#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pixmotion/movable.hpp"
#include "test_support.hpp"

namespace pixmotion {
namespace {

// Straight scalar transcription used as the oracle throughout.
struct Oracle {
  static double f1(double x) { return std::clamp((x - 15.0) / 20.0, 0.0, 1.0); }
  static double lambda(double m) { return 0.5 + 1.0 / (std::exp(0.04 * m) + 1.0); }

  static ScalarGrid probability(const ColorImage& a, const ColorImage& b) {
    const int w = a.width();
    const int h = a.height();
    std::vector<double> mx(a.size());
    std::vector<double> mean(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      double m = 0.0;
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = std::abs(double(a[i][c]) - double(b[i][c]));
        m = std::max(m, d);
        s += d;
      }
      mx[i] = m;
      mean[i] = s / 3.0;
    }
    const double lo = *std::min_element(mean.begin(), mean.end());
    const double hi = *std::max_element(mean.begin(), mean.end());
    const double lam = lambda(hi);
    ScalarGrid out(w, h);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double f2 = hi > lo ? (mean[i] - lo) / (hi - lo) : 0.0;
      out[i] = lam * f1(mx[i]) + (1.0 - lam) * f2;
    }
    return out;
  }
};

TEST(MovableParams, Validate) {
  EXPECT_NO_THROW(MovableParams{}.validate());
  EXPECT_THROW((MovableParams{35, 15, 0.04}.validate()), Error);
  EXPECT_THROW((MovableParams{-1, 15, 0.04}.validate()), Error);
  EXPECT_THROW((MovableParams{15, 300, 0.04}.validate()), Error);
  EXPECT_THROW((MovableParams{15, 35, 0.0}.validate()), Error);
}

TEST(AbsDiff, IdenticalFramesGiveZero) {
  std::mt19937_64 rng(1);
  const ColorImage a = testing::random_image(17, 9, rng);
  const DiffChannels d = abs_diff(a, a);
  for (double v : d.max_diff) EXPECT_EQ(v, 0.0);
  for (double v : d.mean_diff) EXPECT_EQ(v, 0.0);
}

TEST(AbsDiff, SinglePixel) {
  ColorImage a(1, 1, Rgb8{100, 50, 50});
  ColorImage b(1, 1, Rgb8{70, 50, 50});
  const DiffChannels d = abs_diff(a, b);
  EXPECT_EQ(d.max_diff(0, 0), 30.0);
  EXPECT_EQ(d.mean_diff(0, 0), 10.0);
}

TEST(AbsDiff, MatchesScalarLoopBitExactly) {
  std::mt19937_64 rng(2);
  const ColorImage a = testing::random_image(31, 23, rng);
  const ColorImage b = testing::random_image(31, 23, rng);
  const DiffChannels d = abs_diff(a, b);
  for (int y = 0; y < 23; ++y) {
    for (int x = 0; x < 31; ++x) {
      double m = 0.0;
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double v = std::abs(double(a(x, y)[c]) - double(b(x, y)[c]));
        m = std::max(m, v);
        s += v;
      }
      EXPECT_EQ(d.max_diff(x, y), m);
      EXPECT_EQ(d.mean_diff(x, y), s / 3.0);
      EXPECT_GE(d.max_diff(x, y), d.mean_diff(x, y));
    }
  }
}

TEST(AbsDiff, DimensionMismatch) {
  try {
    (void)abs_diff(ColorImage(4, 4), ColorImage(4, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionMismatch);
  }
}

TEST(F1, ClipInterval) {
  const MovableParams p;
  EXPECT_EQ(f1_clip_norm(15.0, p), 0.0);
  EXPECT_EQ(f1_clip_norm(35.0, p), 1.0);
  EXPECT_EQ(f1_clip_norm(25.0, p), 0.5);
  EXPECT_EQ(f1_clip_norm(0.0, p), 0.0);
  EXPECT_EQ(f1_clip_norm(255.0, p), 1.0);
}

TEST(F2, MinMax) {
  ScalarGrid g(51, 1);
  for (int i = 0; i <= 50; ++i) g(i, 0) = i;
  const ScalarGrid n = f2_minmax_norm(g);
  EXPECT_EQ(n(0, 0), 0.0);
  EXPECT_EQ(n(50, 0), 1.0);
  EXPECT_NEAR(n(25, 0), 0.5, 1e-15);
}

TEST(F2, ConstantFrameIsZero) {
  const ScalarGrid n = f2_minmax_norm(ScalarGrid(8, 8, 42.0));
  for (double v : n) EXPECT_EQ(v, 0.0);
}

TEST(F2, MatchesScalarOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 255.0);
  ScalarGrid g(40, 30);
  for (double& v : g) v = d(rng);
  const double lo = *std::min_element(g.begin(), g.end());
  const double hi = *std::max_element(g.begin(), g.end());
  const ScalarGrid n = f2_minmax_norm(g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(n[i], (g[i] - lo) / (hi - lo), 1e-12);
}

TEST(Lambda, Values) {
  const MovableParams p;
  EXPECT_EQ(lambda_blend_weight(0.0, p), 1.0);
  EXPECT_NEAR(lambda_blend_weight(50.0, p), 0.5 + 1.0 / (std::exp(2.0) + 1.0), 1e-15);
  EXPECT_NEAR(lambda_blend_weight(50.0, p), 0.6192, 1e-4);
  EXPECT_NEAR(lambda_blend_weight(1e4, p), 0.5, 1e-12);
  EXPECT_GT(lambda_blend_weight(255.0, p), 0.5);
  EXPECT_EQ(lambda_blend_weight(ScalarGrid(4, 4, 0.0), p), 1.0);
}

TEST(Lambda, MonotoneDecreasingProperty) {
  const MovableParams p;
  double prev = lambda_blend_weight(0.0, p);
  for (double m = 0.5; m <= 255.0; m += 0.5) {
    const double l = lambda_blend_weight(m, p);
    EXPECT_LT(l, prev);
    EXPECT_GT(l, 0.5);
    EXPECT_LE(l, 1.0);
    prev = l;
  }
}

TEST(MovableProbability, IdenticalInputsGiveExactZero) {
  std::mt19937_64 rng(4);
  const ColorImage a = testing::random_image(20, 10, rng);
  const ProbabilityMap p = movable_probability(a, a);
  for (double v : p.values) EXPECT_EQ(v, 0.0);
  for (auto v : p.valid) EXPECT_EQ(v, 1);
}

TEST(MovableProbability, TwoLevelBlob) {
  ColorImage bg(12, 10, Rgb8{0, 0, 0});
  ColorImage frame = bg;
  for (int y = 3; y < 7; ++y) {
    for (int x = 4; x < 9; ++x) frame(x, y) = {80, 80, 80};
  }
  const ProbabilityMap p = movable_probability(frame, bg);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 12; ++x) {
      const bool inside = x >= 4 && x < 9 && y >= 3 && y < 7;
      EXPECT_NEAR(p.values(x, y), inside ? 1.0 : 0.0, 1e-15);
    }
  }
}

TEST(MovableProbability, MatchesPipelineOracleOnRandomPairs) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const ColorImage a = testing::random_image(24, 16, rng);
    const ColorImage b = testing::random_image(24, 16, rng);
    const ProbabilityMap p = movable_probability(a, b);
    const ScalarGrid o = Oracle::probability(a, b);
    for (std::size_t i = 0; i < o.size(); ++i) {
      ASSERT_NEAR(p.values[i], o[i], 1e-12);
      ASSERT_GE(p.values[i], 0.0);
      ASSERT_LE(p.values[i], 1.0);
    }
  }
}

TEST(MovableProbability, MonotoneInMaxDiffProperty) {
  // Raising one channel's difference raises max_diff; the frame-wide mean
  // channel is kept fixed by lowering another channel by the same amount.
  ColorImage bg(3, 1, Rgb8{100, 100, 100});
  ColorImage frame(3, 1, Rgb8{100, 100, 100});
  frame(2, 0) = {160, 160, 160};
  double prev = -1.0;
  for (int d = 0; d <= 20; ++d) {
    frame(0, 0) = {static_cast<std::uint8_t>(100 + 20 + d), static_cast<std::uint8_t>(100 + 20 - d), 100};
    const double p = movable_probability(frame, bg).values(0, 0);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

}  // namespace
}  // namespace pixmotion
