#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "rmplan/error.hpp"
#include "rmplan/riemannian_metric.hpp"

using namespace rmplan;
using fixtures::kPort;

namespace {

Vec3 random_unit(std::mt19937_64& rng)
{
  std::normal_distribution<double> g;
  return Vec3(g(rng), g(rng), g(rng)).normalized();
}

// Euler-Lagrange expression of L = q'^T G(q) q' / 2 by finite differences of
// the metric alone.
Vec3 euler_lagrange_fd(const RiemannianMetric& m, const Vec3& q, const Vec3& v, const Vec3& a)
{
  const double h = 1e-6;
  const auto G = [&](const Vec3& x) { return m.total(ReducedConfig(x)); };
  const Mat3 dG_dt = (G(q + h * v) - G(q - h * v)) / (2 * h);
  Vec3 dL_dq;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i) * h;
    dL_dq[i] = 0.5 * (v.dot(G(q + e) * v) - v.dot(G(q - e) * v)) / (2 * h);
  }
  return G(q) * a + dG_dt * v - dL_dq;
}

}  // namespace

TEST(MetricKinematic, ZeroGradientsGiveIdentity)
{
  EXPECT_EQ(metric_kinematic(FgGradient{Vec3::Zero(), Vec3::Zero()}), Mat3::Identity());
}

TEST(MetricKinematic, MatchesFiniteDifferenceOfLift)
{
  const auto scene = fixtures::hemisphere();
  const ArmGeometry arm;
  const auto qs = fixtures::visible_free_queries(scene, arm, 200, 21);
  std::mt19937_64 rng(8);
  int checked = 0;
  for (const auto& q : qs) {
    const Vec3 dq = 1e-5 * random_unit(rng);
    const auto hi = try_lift(ReducedConfig(q.q + 0.5 * dq), kPort, arm);
    const auto lo = try_lift(ReducedConfig(q.q - 0.5 * dq), kPort, arm);
    if (!hi || !lo) continue;
    const double fd = (hi->q - lo->q).squaredNorm();
    const double quad = dq.dot(metric_kinematic(q, kPort, arm) * dq);
    EXPECT_NEAR(quad, fd, 1e-4 * fd);
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(MetricKinematic, SymmetricWithEigenvaluesAtLeastOne)
{
  const auto scene = fixtures::hemisphere();
  const ArmGeometry arm;
  for (const auto& q : fixtures::visible_free_queries(scene, arm, 300, 22)) {
    const Mat3 G = metric_kinematic(q, kPort, arm);
    EXPECT_LE((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(G.determinant(), 1.0);
    Eigen::SelfAdjointEigenSolver<Mat3> es(G);
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-12);
  }
}

TEST(MetricObstacle, Examples)
{
  const ReducedConfig q(Vec3(0.1, 0.2, 0.3));
  const ReducedConfig qa(Vec3(0.1, 0.2, 0.35));
  EXPECT_EQ(metric_obstacle(q, qa, 0.0), Mat3::Zero());
  EXPECT_TRUE(metric_obstacle(q, qa, 0.05).isApprox(Mat3::Identity(), 1e-12));
  const ReducedConfig half(Vec3(0.1, 0.2, 0.325));
  EXPECT_TRUE(metric_obstacle(half, qa, 0.05).isApprox(2.0 * metric_obstacle(q, qa, 0.05), 1e-12));
  try {
    (void)metric_obstacle(qa, qa, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AtBoundary);
  }
}

TEST(MetricTotal, SumsComponentsOnMesh)
{
  const auto scene = fixtures::hemisphere();
  const ArmGeometry arm;
  const auto mesh = fixtures::segmented_boundary(scene, arm, 16, 20);
  const double s = deg2rad(0.842);
  for (const auto& q : fixtures::visible_free_queries(scene, arm, 20, 23)) {
    const auto qa = nearest_forbidden_greedy(q, mesh).q_a;
    const Mat3 expect = metric_kinematic(q, kPort, arm) + metric_obstacle(q, qa, s);
    EXPECT_TRUE(metric_total(q, mesh, kPort, arm, s).isApprox(expect, 1e-14));
  }
}

TEST(EdgeCost, BracketFactorTwoAtSigmaDistance)
{
  const double s = deg2rad(0.842);
  const LinearKinematicField flat;
  const Vec3 mid(0.4, 0.5, -0.2);
  const PointObstacleField obs(mid + s * Vec3(0, 1, 0));
  const RiemannianMetric m(&flat, &obs, s);
  EXPECT_DOUBLE_EQ(m.barrier(ReducedConfig(mid)), 1.0);
  const Vec3 dq(0.01, 0, 0);
  const ReducedConfig a(mid - 0.5 * dq), b(mid + 0.5 * dq);
  // |dq|_G with G = I + I at the midpoint, times the bracket 1 + 1.
  EXPECT_NEAR(edge_cost(a, b, m), std::sqrt(2.0) * 0.01 * 2.0, 1e-15);
}

TEST(EdgeCost, ZeroLengthSymmetricAndBoundary)
{
  const auto scene = fixtures::hemisphere();
  const ArmGeometry arm;
  const auto mesh = fixtures::segmented_boundary(scene, arm, 16, 20);
  const ArmKinematicField kin(kPort, arm);
  const MeshObstacleField obs(mesh);
  const RiemannianMetric m(&kin, &obs, deg2rad(1.0));
  const auto qs = fixtures::visible_free_queries(scene, arm, 40, 24);
  EXPECT_EQ(edge_cost(qs[0], qs[0], m), 0.0);
  for (std::size_t i = 0; i + 1 < qs.size(); i += 2) {
    if (!try_lift(ReducedConfig((qs[i].q + qs[i + 1].q) / 2), kPort, arm)) continue;
    const double ab = edge_cost(qs[i], qs[i + 1], m);
    EXPECT_EQ(ab, edge_cost(qs[i + 1], qs[i], m));
    // Never below the chord length under G_q alone.
    const ReducedConfig mid((qs[i].q + qs[i + 1].q) / 2);
    const Vec3 dq = qs[i + 1].q - qs[i].q;
    EXPECT_GE(ab, std::sqrt(dq.dot(metric_kinematic(mid, kPort, arm) * dq)));
  }
  // Midpoint on the forbidden point.
  const PointObstacleField at(Vec3(0.5, 0.5, 0.5));
  const RiemannianMetric pm(&kin, &at, deg2rad(1.0));
  EXPECT_TRUE(std::isinf(edge_cost(ReducedConfig(Vec3(0.25, 0.5, 0.5)), ReducedConfig(Vec3(0.75, 0.5, 0.5)), pm)));
}

TEST(PathLength, FlatAndConformal)
{
  const LinearKinematicField flat;
  const RiemannianMetric m(&flat, nullptr, 0.0);
  std::vector<ReducedConfig> line;
  for (int i = 0; i <= 10; ++i) line.emplace_back(Vec3(1, 2, 3) + i * Vec3(0.3, -0.4, 1.2) / 10.0);
  EXPECT_NEAR(path_length(line, m), 1.3, 1e-14);

  // G = c I through a fixed obstacle at constant distance: sigma / d = c - 1.
  const PointObstacleField far(Vec3(1e6, 0, 0));
  const double c = 4.0;
  std::vector<ReducedConfig> arc;
  for (int i = 0; i <= 50; ++i) {
    const double t = i / 50.0;
    arc.emplace_back(Vec3(std::cos(t), std::sin(t), 0.0) * 1e-3);
  }
  const double sigma = (c - 1.0) * 1e6;
  const RiemannianMetric conformal(&flat, &far, sigma);
  const double base = path_length(arc, m);
  EXPECT_NEAR(path_length(arc, conformal) / base, std::sqrt(c), 1e-8);

  EXPECT_THROW((void)path_length({line.front()}, m), Error);
}

TEST(PathLength, RichardsonRatioNearFour)
{
  const auto scene = fixtures::hemisphere();
  const ArmGeometry arm;
  const auto qs = fixtures::visible_free_queries(scene, arm, 2, 25);
  const ArmKinematicField kin(kPort, arm);
  const RiemannianMetric m(&kin, nullptr, 0.0);
  const Vec3 a = qs[0].q, b = qs[1].q;
  const Vec3 bend(0.0, 0.0, 0.05);
  const auto curve = [&](int n) {
    std::vector<ReducedConfig> out;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      out.emplace_back(a + t * (b - a) + std::sin(kPi * t) * bend);
    }
    return path_length(out, m);
  };
  const double l1 = curve(16), l2 = curve(32), l3 = curve(64);
  const double ratio = (l2 - l1) / (l3 - l2);
  EXPECT_NEAR(ratio, 4.0, 0.4);
}

TEST(Geodesic, FlatStraightLine)
{
  const LinearKinematicField flat;
  const RiemannianMetric m(&flat, nullptr, 0.0);
  const Vec3 a(0.2, -0.3, 0.5), v(0.7, 0.1, -0.4);
  const double h = 1e-3;
  std::vector<ReducedConfig> s;
  for (int i = 0; i <= 20; ++i) s.emplace_back(a + (i * h) * v);
  for (std::size_t i = 1; i + 1 < s.size(); ++i) EXPECT_LE(geodesic_residual(s, h, i, m).norm(), 1e-8);
}

TEST(Geodesic, NonConstantSpeedResidualAlongVelocity)
{
  const LinearKinematicField flat;
  const RiemannianMetric m(&flat, nullptr, 0.0);
  const Vec3 a(0.2, -0.3, 0.5), v(0.7, 0.1, -0.4);
  const auto r = geodesic_residual(ReducedConfig(a), v, 3.0 * v, m);
  EXPECT_GT(r.norm(), 1e-3);
  EXPECT_LE(r.total.cross(v).norm(), 1e-12);
}

TEST(Geodesic, LinearFieldsGiveConstantMetric)
{
  const LinearKinematicField lin(Vec3(0.3, -1.2, 0.5), Vec3(2.0, 0.1, -0.7));
  const RiemannianMetric m(&lin, nullptr, 0.0);
  const Vec3 a(1, 1, 1), v(-0.2, 0.4, 0.9);
  const double h = 1e-3;
  std::vector<ReducedConfig> s;
  for (int i = 0; i <= 10; ++i) s.emplace_back(a + (i * h) * v);
  for (std::size_t i = 1; i + 1 < s.size(); ++i) EXPECT_LE(geodesic_residual(s, h, i, m).norm(), 1e-8);
}

TEST(Geodesic, MatchesEulerLagrangeOfMetric)
{
  const auto scene = fixtures::hemisphere();
  const ArmGeometry arm;
  const ArmKinematicField kin(kPort, arm);
  std::mt19937_64 rng(9);
  for (const auto& q : fixtures::visible_free_queries(scene, arm, 20, 26)) {
    const PointObstacleField obs(q.q + 0.05 * random_unit(rng));
    const RiemannianMetric m(&kin, &obs, deg2rad(0.842));
    const Vec3 v = random_unit(rng), a = random_unit(rng);
    const Vec3 expect = euler_lagrange_fd(m, q.q, v, a);
    const Vec3 got = geodesic_residual(q, v, a, m).total;
    EXPECT_LE((got - expect).norm(), 1e-5 * (1.0 + expect.norm()));
  }
}

TEST(Geodesic, ResidualIsLinearInTheLagrangian)
{
  const auto scene = fixtures::hemisphere();
  const ArmGeometry arm;
  const ArmKinematicField kin(kPort, arm);
  std::mt19937_64 rng(10);
  for (const auto& q : fixtures::visible_free_queries(scene, arm, 50, 27)) {
    const PointObstacleField obs(q.q + 0.03 * random_unit(rng));
    const double s = deg2rad(0.842);
    const RiemannianMetric both(&kin, &obs, s), only_kin(&kin, nullptr, 0.0), only_obs(nullptr, &obs, s);
    const Vec3 v = random_unit(rng), a = random_unit(rng);
    const auto r = geodesic_residual(q, v, a, both);
    const Vec3 sum = geodesic_residual(q, v, a, only_kin).total + geodesic_residual(q, v, a, only_obs).total;
    EXPECT_LE((r.total - sum).norm(), 1e-9 * std::max(1.0, r.total.norm()));
    EXPECT_LE((r.total - r.kinematic - r.obstacle).norm(), 1e-12 * std::max(1.0, r.total.norm()));
  }
}

TEST(Geodesic, AtBoundaryThrows)
{
  const PointObstacleField obs(Vec3(0, 0, 0));
  const RiemannianMetric m(nullptr, &obs, 0.1);
  EXPECT_THROW((void)geodesic_residual(ReducedConfig(Vec3(0, 0, 0)), Vec3(1, 0, 0), Vec3::Zero(), m), Error);
}
