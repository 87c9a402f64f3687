#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "rmplan/error.hpp"
#include "rmplan/joint_obstacle_map.hpp"

using namespace rmplan;
using rmplan::fixtures::hemisphere;
using rmplan::fixtures::kPort;

namespace {

Scene single_organ_scene(const ImplicitSurface& organ)
{
  return Scene("organ", Point3(0, 0, 100), ImplicitSurface::sphere(Point3(0, 0, 0), 1000.0), {organ},
               std::nullopt, 500.0, 200);
}

// Closed surface of revolution around z with radius profile rho(z), z in
// [-1, 1]; poles at both ends. Normals point outward.
BoundaryMesh revolution_mesh(double (*rho)(double), int rings, int seg)
{
  BoundaryMesh m;
  auto add = [&](const Vec3& p, const Vec3& n) {
    BoundaryVertex v;
    v.q = ReducedConfig(p);
    m.vertices.push_back(v);
    m.points.push_back(p);
    m.normals.push_back(n.normalized());
  };
  add(Vec3(0, 0, 1), Vec3(0, 0, 1));
  for (int i = 1; i < rings; ++i) {
    const double t = kPi * i / rings;
    const double z = std::cos(t);
    for (int j = 0; j < seg; ++j) {
      const double a = 2 * kPi * j / seg;
      const double r = rho(z);
      add(Vec3(r * std::cos(a), r * std::sin(a), z), Vec3(std::cos(a), std::sin(a), z));
    }
  }
  add(Vec3(0, 0, -1), Vec3(0, 0, -1));
  const int south = static_cast<int>(m.points.size()) - 1;
  auto ring = [&](int i, int j) { return 1 + (i - 1) * seg + (j % seg); };
  for (int j = 0; j < seg; ++j) m.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i + 1 < rings; ++i)
    for (int j = 0; j < seg; ++j) {
      m.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      m.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  for (int j = 0; j < seg; ++j) m.triangles.push_back({south, ring(rings - 1, j + 1), ring(rings - 1, j)});
  rebuild_adjacency(m);
  m.curvature.assign(m.size(), CurvatureSample{1.0, 1.0, true});
  return m;
}

double sphere_profile(double z) { return std::sqrt(std::max(0.0, 1 - z * z)); }

// Two bulbs joined by a narrow waist at z = 0.
double dumbbell_profile(double z)
{
  const double s = sphere_profile(z);
  return s * (0.4 + 0.6 * std::abs(z));
}

}  // namespace

TEST(Curvature, SphereClosedForm)
{
  const double R = 37.0;
  const Vec3 n = Vec3(1, 2, -2).normalized();
  const Mat3 hess = (Mat3::Identity() - n * n.transpose()) / R;
  const auto c = implicit_curvature(n, hess);
  EXPECT_NEAR(c.K, 1 / (R * R), 1e-6 / (R * R));
  EXPECT_NEAR(c.H, 1 / R, 1e-6 / R);
  EXPECT_TRUE(c.nonconcave);

  // Seen from inside (cavity), the same sphere bends towards free space.
  const auto inner = implicit_curvature(-n, -hess);
  EXPECT_NEAR(inner.K, 1 / (R * R), 1e-6 / (R * R));
  EXPECT_NEAR(inner.H, -1 / R, 1e-6 / R);
  EXPECT_FALSE(inner.nonconcave);
}

TEST(Curvature, IdentityPullbackSphereAndCavity)
{
  const double R = 60.0;
  const auto scene = single_organ_scene(ImplicitSurface::sphere(Point3(10, -5, -200), R));
  const Point3 x = Point3(10, -5, -200) + R * Vec3(0.3, -0.4, 0.5).normalized();
  const auto c = curvature_identity(scene, 1, x);
  EXPECT_NEAR(c.K, 1 / (R * R), 1e-6 / (R * R));
  EXPECT_NEAR(std::abs(c.H), 1 / R, 1e-6 / R);
  EXPECT_GT(c.H, 0.0);

  const Point3 y = Point3(0, 0, -1000.0);
  const auto cav = curvature_identity(scene, 0, y);
  EXPECT_NEAR(cav.K, 1e-6, 1e-12);
  EXPECT_LT(cav.H, 0.0);
}

TEST(Curvature, IdentityPullbackEllipsoidPoles)
{
  const double a = 40, b = 70, c = 25;
  const Point3 o(0, 0, -300);
  const auto scene = single_organ_scene(ImplicitSurface::ellipsoid(o, Vec3(a, b, c)));
  // Principal curvatures at (0, 0, c): c / a^2 and c / b^2.
  const auto top = curvature_identity(scene, 1, o + Vec3(0, 0, c));
  const double k1 = c / (a * a), k2 = c / (b * b);
  EXPECT_NEAR(top.K, k1 * k2, 1e-6 * k1 * k2);
  EXPECT_NEAR(top.H, 0.5 * (k1 + k2), 1e-6 * 0.5 * (k1 + k2));
  // At (a, 0, 0): a / b^2 and a / c^2.
  const auto side = curvature_identity(scene, 1, o + Vec3(a, 0, 0));
  const double m1 = a / (b * b), m2 = a / (c * c);
  EXPECT_NEAR(side.K, m1 * m2, 1e-6 * m1 * m2);
  EXPECT_NEAR(side.H, 0.5 * (m1 + m2), 1e-6 * 0.5 * (m1 + m2));
}

TEST(Curvature, FlagMatchesPredicate)
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 200; ++k) {
    const Vec3 grad(g(rng), g(rng), g(rng));
    Mat3 h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = g(rng);
    const auto c = implicit_curvature(grad, h);
    EXPECT_EQ(c.nonconcave, c.K >= 0 && c.H >= 0);
  }
}

TEST(BuildBoundary, CardinalityAndFidelity)
{
  const auto scene = hemisphere();
  const ArmGeometry arm;
  const auto mesh = build_boundary(scene, arm, 12, 16);
  const std::size_t grid = static_cast<std::size_t>((12 - 1) * 16 + 1);
  EXPECT_EQ(mesh.size() + mesh.skipped.size(), grid);
  EXPECT_GT(mesh.size(), grid / 2);
  for (const auto& v : mesh.vertices) {
    const auto fk = forward_kinematics(v.lifted, arm);
    EXPECT_LE((fk.tip - v.x).norm(), 1e-6);
    EXPECT_EQ(v.q.q, v.lifted.q.head<3>());
  }
  for (const auto& t : mesh.triangles)
    for (int k : t) {
      ASSERT_GE(k, 0);
      ASSERT_LT(static_cast<std::size_t>(k), mesh.size());
    }
  for (std::size_t v = 0; v < mesh.size(); ++v)
    for (int w : mesh.adjacency[v]) {
      const auto& back = mesh.adjacency[static_cast<std::size_t>(w)];
      EXPECT_TRUE(std::binary_search(back.begin(), back.end(), static_cast<int>(v)));
    }
}

TEST(BuildBoundary, StrictModeReportsUnreachableDirection)
{
  const auto scene = hemisphere();
  try {
    (void)build_boundary(scene, ArmGeometry{}, 12, 16, BuildOptions{true});
    FAIL() << "expected IKFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IKFailure);
    EXPECT_NE(std::string(e.what()).find("theta"), std::string::npos);
  }
}

TEST(BuildBoundary, RejectsSmallGrid)
{
  EXPECT_THROW((void)build_boundary(hemisphere(), ArmGeometry{}, 3, 8), Error);
  EXPECT_THROW((void)build_boundary(hemisphere(), ArmGeometry{}, 4, 7), Error);
}

TEST(BuildBoundary, Deterministic)
{
  const auto scene = hemisphere();
  const ArmGeometry arm;
  const auto a = fixtures::segmented_boundary(scene, arm, 16, 20);
  const auto b = fixtures::segmented_boundary(scene, arm, 16, 20);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.triangles, b.triangles);
  EXPECT_EQ(a.patch_id, b.patch_id);
  EXPECT_EQ(a.patch_count(), b.patch_count());
}

TEST(Segmentation, ConvexClosedSurfaceIsOnePatch)
{
  auto m = revolution_mesh(sphere_profile, 10, 14);
  segment_convex_patches(m);
  ASSERT_EQ(m.patch_count(), 1u);
  EXPECT_TRUE(m.patch_convex[0]);
}

TEST(Segmentation, ConcaveWaistSplitsLobes)
{
  auto m = revolution_mesh(dumbbell_profile, 20, 16);
  for (std::size_t v = 0; v < m.size(); ++v)
    if (std::abs(m.points[v].z()) < 0.35) m.curvature[v] = {-1.0, -1.0, false};
  segment_convex_patches(m);
  std::set<int> convex;
  for (std::size_t v = 0; v < m.size(); ++v) {
    const int p = m.patch_id[v];
    if (std::abs(m.points[v].z()) < 0.35) {
      EXPECT_FALSE(m.patch_convex[static_cast<std::size_t>(p)]);
    } else if (m.patch_convex[static_cast<std::size_t>(p)]) {
      convex.insert(p);
    }
  }
  EXPECT_GE(convex.size(), 2u);
  EXPECT_NE(m.patch_id[0], m.patch_id[m.size() - 1]);
}

TEST(Segmentation, PatchesAreEdgeConnected)
{
  const auto scene = hemisphere();
  const auto mesh = fixtures::segmented_boundary(scene, ArmGeometry{}, 20, 24);
  for (std::size_t p = 0; p < mesh.patch_count(); ++p) {
    std::vector<int> members;
    for (std::size_t v = 0; v < mesh.size(); ++v)
      if (mesh.patch_id[v] == static_cast<int>(p)) members.push_back(static_cast<int>(v));
    ASSERT_FALSE(members.empty());
    EXPECT_EQ(mesh.patch_id[static_cast<std::size_t>(mesh.patch_seed[p])], static_cast<int>(p));
    std::set<int> seen{members.front()};
    std::vector<int> stack{members.front()};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : mesh.adjacency[static_cast<std::size_t>(v)])
        if (mesh.patch_id[static_cast<std::size_t>(w)] == static_cast<int>(p) && seen.insert(w).second)
          stack.push_back(w);
    }
    EXPECT_EQ(seen.size(), members.size()) << "patch " << p;
  }
}

TEST(Segmentation, RequiresCurvature)
{
  auto m = revolution_mesh(sphere_profile, 6, 8);
  m.curvature.clear();
  EXPECT_THROW(segment_convex_patches(m), Error);
}

TEST(NearestForbidden, SelfQueryAndSingleVertex)
{
  auto m = revolution_mesh(sphere_profile, 8, 10);
  segment_convex_patches(m);
  for (std::size_t v = 0; v < m.size(); v += 7) {
    const auto r = nearest_forbidden_greedy(m.vertices[v].q, m);
    EXPECT_EQ(r.index, v);
    EXPECT_EQ(r.distance, 0.0);
  }

  BoundaryMesh one;
  BoundaryVertex v;
  v.q = ReducedConfig(Vec3(1, 2, 3));
  one.vertices.push_back(v);
  one.points.push_back(v.q.q);
  const auto r = nearest_forbidden_bruteforce(ReducedConfig(Vec3(0, 0, 0)), one);
  EXPECT_EQ(r.index, 0u);
  EXPECT_NEAR(r.distance, std::sqrt(14.0), 1e-15);
}

TEST(NearestForbidden, EmptyAndUnsegmentedMeshesThrow)
{
  BoundaryMesh empty;
  EXPECT_THROW((void)nearest_forbidden_bruteforce(ReducedConfig(), empty), Error);
  EXPECT_THROW((void)nearest_forbidden_greedy(ReducedConfig(), empty), Error);
  EXPECT_THROW((void)nearest_forbidden_batch_parallel({ReducedConfig()}, empty), Error);
  auto m = revolution_mesh(sphere_profile, 6, 8);
  EXPECT_THROW((void)nearest_forbidden_greedy(ReducedConfig(), m), Error);
}

TEST(NearestForbidden, BruteForceIsMonotoneUnderInsertion)
{
  auto m = revolution_mesh(sphere_profile, 6, 8);
  const ReducedConfig q(Vec3(0.1, 0.2, 3.0));
  const auto before = nearest_forbidden_bruteforce(q, m);
  BoundaryVertex v;
  v.q = ReducedConfig(q.q + 0.5 * (before.q_a.q - q.q));
  m.vertices.push_back(v);
  m.points.push_back(v.q.q);
  const auto after = nearest_forbidden_bruteforce(q, m);
  EXPECT_LT(after.distance, before.distance);
  EXPECT_EQ(after.index, m.size() - 1);
}

TEST(NearestForbidden, GreedyMatchesBruteForceOnSyntheticConvexPatch)
{
  auto m = revolution_mesh(sphere_profile, 16, 24);
  segment_convex_patches(m);
  ASSERT_EQ(m.patch_count(), 1u);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int k = 0; k < 100; ++k) {
    const Vec3 dir = Vec3(g(rng), g(rng), g(rng)).normalized();
    const ReducedConfig q(dir * (1.2 + 2.0 * std::abs(g(rng))));
    EXPECT_EQ(nearest_forbidden_greedy(q, m).index, nearest_forbidden_bruteforce(q, m).index);
  }
}

TEST(NearestForbidden, GreedyOnHemisphereBoundary)
{
  const auto scene = hemisphere();
  const ArmGeometry arm;
  const auto mesh = fixtures::segmented_boundary(scene, arm, 30, 30);
  const auto qs = fixtures::visible_free_queries(scene, arm, 300, 11);
  int on_convex = 0, agree = 0;
  for (const auto& q : qs) {
    const auto b = nearest_forbidden_bruteforce(q, mesh);
    const auto gr = nearest_forbidden_greedy(q, mesh);
    EXPECT_GE(gr.distance, b.distance);
    if (mesh.patch_convex[static_cast<std::size_t>(mesh.patch_id[b.index])]) {
      ++on_convex;
      agree += gr.index == b.index;
    }
  }
  ASSERT_GT(on_convex, 200);
  EXPECT_GE(agree, on_convex * 0.99);
}

TEST(NearestForbidden, BatchParallelMatchesSerial)
{
  const auto scene = hemisphere();
  const ArmGeometry arm;
  const auto mesh = fixtures::segmented_boundary(scene, arm, 16, 20);
  const auto qs = fixtures::visible_free_queries(scene, arm, 200, 4);
  const auto s = nearest_forbidden_batch_serial(qs, mesh);
  const auto p = nearest_forbidden_batch_parallel(qs, mesh);
  ASSERT_EQ(s.size(), p.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].index, p[i].index);
    EXPECT_EQ(s[i].distance, p[i].distance);
  }
}

TEST(Corridor, BladderVerticesNonconcaveInJointSpace)
{
  const auto scene = hemisphere();
  const ArmGeometry arm;
  const auto mesh = fixtures::segmented_boundary(scene, arm, 30, 30);
  const auto corridor = fixtures::corridor_vertices(scene, arm, mesh, 40.0);
  ASSERT_FALSE(corridor.empty());
  std::size_t ok = 0;
  for (auto v : corridor) ok += mesh.curvature[v].nonconcave;
  EXPECT_GE(static_cast<double>(ok), 0.95 * static_cast<double>(corridor.size()));
}
