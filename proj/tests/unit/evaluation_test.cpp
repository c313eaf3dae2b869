#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pixmotion/evaluation.hpp"
#include "test_support.hpp"

namespace pixmotion {
namespace {

Trajectory random_trajectory(std::mt19937_64& rng, std::size_t n, double t0 = 0.0, double dt = 0.1) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<StampedPose> poses;
  for (std::size_t i = 0; i < n; ++i) {
    poses.push_back({t0 + dt * i, PoseSE3(testing::random_rotation(rng, 3.0), {g(rng), g(rng), g(rng)})});
  }
  return Trajectory(poses);
}

Trajectory transformed(const Trajectory& t, const PoseSE3& a) {
  std::vector<StampedPose> out;
  for (const auto& p : t.poses()) out.push_back({p.timestamp, a * p.pose});
  return Trajectory(out);
}

// Horn's closed form via the unit quaternion of the 4x4 symmetric matrix.
RigidAlignment horn_oracle(const std::vector<Eigen::Vector3d>& src, const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Vector3d ms = Eigen::Vector3d::Zero();
  Eigen::Vector3d md = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    ms += src[i];
    md += dst[i];
  }
  ms /= double(src.size());
  md /= double(src.size());
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) s += (src[i] - ms) * (dst[i] - md).transpose();
  Eigen::Matrix4d n;
  n << s(0, 0) + s(1, 1) + s(2, 2), s(1, 2) - s(2, 1), s(2, 0) - s(0, 2), s(0, 1) - s(1, 0),
      s(1, 2) - s(2, 1), s(0, 0) - s(1, 1) - s(2, 2), s(0, 1) + s(1, 0), s(2, 0) + s(0, 2),
      s(2, 0) - s(0, 2), s(0, 1) + s(1, 0), -s(0, 0) + s(1, 1) - s(2, 2), s(1, 2) + s(2, 1),
      s(0, 1) - s(1, 0), s(2, 0) + s(0, 2), s(1, 2) + s(2, 1), -s(0, 0) - s(1, 1) + s(2, 2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(n);
  const Eigen::Vector4d q = es.eigenvectors().col(3);
  RigidAlignment a;
  a.rotation = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).normalized().toRotationMatrix();
  a.translation = md - a.rotation * ms;
  return a;
}

std::vector<PosePair> oracle_association(const Trajectory& est, const Trajectory& gt, double max_gap) {
  struct Cand {
    double dt;
    std::size_t e, g;
  };
  std::vector<Cand> all;
  for (std::size_t e = 0; e < est.size(); ++e) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double dt = std::abs(est[e].timestamp - gt[g].timestamp);
      if (dt <= max_gap) all.push_back({dt, e, g});
    }
  }
  std::sort(all.begin(), all.end(), [](const Cand& a, const Cand& b) {
    return std::tie(a.dt, a.e, a.g) < std::tie(b.dt, b.e, b.g);
  });
  std::vector<bool> used_e(est.size()), used_g(gt.size());
  std::vector<PosePair> out;
  for (const auto& c : all) {
    if (used_e[c.e] || used_g[c.g]) continue;
    used_e[c.e] = used_g[c.g] = true;
    out.push_back({c.e, c.g});
  }
  std::sort(out.begin(), out.end(), [](const PosePair& a, const PosePair& b) { return a.est < b.est; });
  return out;
}

TEST(Trajectory, RejectsNonIncreasingStamps) {
  EXPECT_THROW(Trajectory({{1.0, PoseSE3()}, {1.0, PoseSE3()}}), Error);
  Trajectory t;
  t.push_back({2.0, PoseSE3()});
  EXPECT_THROW(t.push_back({1.0, PoseSE3()}), Error);
}

TEST(Association, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> jitter(-0.03, 0.03);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<StampedPose> e, g;
    double te = 0.0, tg = 0.0;
    for (int i = 0; i < 15; ++i) {
      te += 0.02 + std::abs(jitter(rng));
      tg += 0.02 + std::abs(jitter(rng));
      e.push_back({te, PoseSE3()});
      g.push_back({tg, PoseSE3()});
    }
    const Trajectory est(e), gt(g);
    const auto expected = oracle_association(est, gt, 0.02);
    if (expected.empty()) {
      EXPECT_THROW((void)associate_trajectories(est, gt, 0.02), Error);
      continue;
    }
    const auto got = associate_trajectories(est, gt, 0.02);
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].est, expected[i].est);
      EXPECT_EQ(got[i].gt, expected[i].gt);
    }
  }
}

TEST(Alignment, MatchesQuaternionOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Eigen::Vector3d> src, dst;
    const PoseSE3 a(testing::random_rotation(rng, 3.0), {g(rng), g(rng), g(rng)});
    for (int i = 0; i < 20; ++i) {
      src.emplace_back(g(rng), g(rng), g(rng));
      dst.push_back(a * src.back() + 0.05 * Eigen::Vector3d(g(rng), g(rng), g(rng)));
    }
    const RigidAlignment got = align_rigid(src, dst);
    const RigidAlignment want = horn_oracle(src, dst);
    EXPECT_LT((got.rotation - want.rotation).norm(), 1e-9);
    EXPECT_LT((got.translation - want.translation).norm(), 1e-9);
    EXPECT_NEAR(got.rotation.determinant(), 1.0, 1e-12);
  }
}

TEST(Alignment, DegenerateInputs) {
  std::vector<Eigen::Vector3d> two{{0, 0, 0}, {1, 0, 0}};
  EXPECT_THROW((void)align_rigid(two, two), Error);
  std::vector<Eigen::Vector3d> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  try {
    (void)align_rigid(line, line);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

TEST(Ate, IdenticalTrajectoriesGiveZero) {
  std::mt19937_64 rng(3);
  const Trajectory t = random_trajectory(rng, 50);
  EXPECT_EQ(evaluate(t, t).ate_rmse, 0.0);
}

TEST(Ate, InvariantToRigidTransformOfEstimate) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory gt = random_trajectory(rng, 40);
    std::vector<StampedPose> noisy;
    for (const auto& p : gt.poses()) {
      noisy.push_back({p.timestamp, PoseSE3(p.pose.rotation(), p.pose.translation() + 0.1 * Eigen::Vector3d(g(rng), g(rng), g(rng)))});
    }
    const Trajectory est(noisy);
    const double base = evaluate(est, gt).ate_rmse;
    const PoseSE3 a(testing::random_rotation(rng, 3.0), {10 * g(rng), 10 * g(rng), 10 * g(rng)});
    EXPECT_NEAR(evaluate(transformed(est, a), gt).ate_rmse, base, 1e-9);
    EXPECT_LT(evaluate(transformed(gt, a), gt).ate_rmse, 1e-9);
  }
}

TEST(Ate, MatchesScalarOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Trajectory est = random_trajectory(rng, 30);
    const Trajectory gt = random_trajectory(rng, 30);
    const auto pairs = associate_trajectories(est, gt);
    const RigidAlignment a = align_umeyama(est, gt, pairs);
    double sum = 0.0;
    for (const auto& p : pairs) {
      const Eigen::Vector3d pe = est[p.est].pose.translation();
      const Eigen::Vector3d pg = gt[p.gt].pose.translation();
      double sq = 0.0;
      for (int r = 0; r < 3; ++r) {
        double v = a.translation(r) - pg(r);
        for (int c = 0; c < 3; ++c) v += a.rotation(r, c) * pe(c);
        sq += v * v;
      }
      sum += sq;
    }
    const double expected = std::sqrt(sum / double(pairs.size()));
    EXPECT_NEAR(ate_rmse(est, gt, pairs, a), expected, 1e-12);
  }
}

TEST(TrackingRate, Cases) {
  std::mt19937_64 rng(6);
  const Trajectory full = random_trajectory(rng, 11, 5.0, 0.1);
  EXPECT_DOUBLE_EQ(tracking_rate(full, 5.0, 6.0), 1.0);
  EXPECT_EQ(tracking_rate(Trajectory(), 5.0, 6.0), 0.0);
  const Trajectory half(std::vector<StampedPose>(full.poses().begin(), full.poses().begin() + 6));
  EXPECT_NEAR(tracking_rate(half, 5.0, 6.0), 0.5, 1e-12);
  EXPECT_EQ(tracking_rate(full, 5.0, 5.5), 1.0);
  const Trajectory one({{5.5, PoseSE3()}});
  EXPECT_EQ(tracking_rate(one, 5.0, 6.0), 0.0);
}

TEST(TumTrajectory, RoundTrip) {
  std::mt19937_64 rng(7);
  const Trajectory t = random_trajectory(rng, 20, 1305031102.175304, 0.033);
  std::stringstream ss;
  write_tum_trajectory(ss, t);
  const Trajectory back = read_tum_trajectory(ss);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(back[i].timestamp, t[i].timestamp, 1e-9);
    EXPECT_TRUE(back[i].pose.is_approx(t[i].pose, 1e-12));
  }
}

TEST(TumTrajectory, MalformedLines) {
  std::stringstream bad("# header\n1.0 0 0 0 0 0 0\n");
  EXPECT_THROW((void)read_tum_trajectory(bad), Error);
  std::stringstream text("# header\n\n1.0 1 2 3 0 0 0 1\n");
  const Trajectory t = read_tum_trajectory(text);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].pose.translation(), Eigen::Vector3d(1, 2, 3));
}

TEST(Report, FormatsContainMetrics) {
  std::mt19937_64 rng(8);
  const Trajectory t = random_trajectory(rng, 10);
  const EvalReport r = evaluate(t, t, 0.0, 0.9);
  EXPECT_EQ(r.matched_pairs, 10u);
  EXPECT_DOUBLE_EQ(r.tracking_rate, 1.0);
  EXPECT_NE(format_report_kv(r).find("ate_rmse="), std::string::npos);
  EXPECT_NE(format_report_text(r).find("ATE"), std::string::npos);
}

}  // namespace
}  // namespace pixmotion
