#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "rmplan/error.hpp"
#include "rmplan/kernels.hpp"
#include "rmplan/scene.hpp"

using namespace rmplan;

namespace {

const Point3 kPort(750.0, 0.0, -300.0);

// Closed-form distance along a ray from inside a sphere to its far side.
double exit_distance(const Point3& o, const Vec3& e, const Point3& c, double r)
{
  const Vec3 m = o - c;
  const double b = m.dot(e);
  return -b + std::sqrt(b * b - (m.squaredNorm() - r * r));
}

// Entry distance into a sphere from outside, or +inf if missed.
double entry_distance(const Point3& o, const Vec3& e, const Point3& c, double r)
{
  const Vec3 m = o - c;
  const double b = m.dot(e);
  const double disc = b * b - (m.squaredNorm() - r * r);
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double t = -b - std::sqrt(disc);
  return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

}  // namespace

TEST(ImplicitSurface, SphereDerivativesMatchFiniteDifferences)
{
  const auto s = ImplicitSurface::sphere(Point3(1, 2, 3), 4.0);
  const auto e = ImplicitSurface::ellipsoid(Point3(1, 2, 3), Vec3(4, 2, 1));
  const Point3 x(3.0, -1.0, 5.5);
  for (const auto* f : {&s, &e}) {
    const double h = 1e-5;
    for (int i = 0; i < 3; ++i) {
      Point3 xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      EXPECT_NEAR(f->gradient(x)[i], (f->value(xp) - f->value(xm)) / (2 * h), 1e-7);
      const Vec3 col = (f->gradient(xp) - f->gradient(xm)) / (2 * h);
      EXPECT_LT((f->hessian(x).col(i) - col).norm(), 1e-7);
    }
  }
  EXPECT_NEAR(s.value(Point3(5, 2, 3)), 0.0, 1e-15);
  EXPECT_NEAR(e.value(Point3(1, 2, 4)), 0.0, 1e-15);
}

TEST(ImplicitSurface, AreasOfKnownShapes)
{
  EXPECT_NEAR(ImplicitSurface::sphere(Point3::Zero(), 2.0).full_area(), 16 * kPi, 1e-12);
  // Thomsen's formula is exact for spheres and within ~1% otherwise; the
  // prolate spheroid with a = 2, c = 1 has area 2 pi (1 + 4 asin(e)/e)
  // with e = sqrt(3)/2 in units of the short radius.
  const double ecc = std::sqrt(3.0) / 2.0;
  const double exact = 2 * kPi * (1.0 + 2.0 * std::asin(ecc) / ecc);
  EXPECT_NEAR(ImplicitSurface::ellipsoid(Point3::Zero(), Vec3(2, 1, 1)).full_area(), exact,
              0.012 * exact);
}

TEST(ImplicitSurface, UnionIsMinimumOfParts)
{
  const auto a = ImplicitSurface::sphere(Point3::Zero(), 1.0);
  const auto b = ImplicitSurface::sphere(Point3(1.5, 0, 0), 1.0);
  const auto u = ImplicitSurface::make_union({a, b});
  for (const Point3& x : {Point3(0.2, 0.1, 0), Point3(1.7, 0, 0.3), Point3(-3, 2, 1)})
    EXPECT_DOUBLE_EQ(u.value(x), std::min(a.value(x), b.value(x)));
  // The lens where the spheres overlap is not surface.
  EXPECT_LT(u.value(Point3(1, 0, 0)), 0.0);
  EXPECT_TRUE(u.in_surface_domain(Point3(-1, 0, 0)));
}

TEST(SphericalDirection, RejectsUpperHalf)
{
  EXPECT_THROW(SphericalDirection(0.3, 0.0), Error);
  EXPECT_THROW(SphericalDirection(2.0, 7.0), Error);
  EXPECT_TRUE(SphericalDirection(kPi, 0.0).unit().isApprox(Vec3(0, 0, -1), 1e-12));
}

TEST(Scene, HemisphereGeometry)
{
  const auto s = make_hemisphere_scene(500.0, 0.5, kPort, 0.0, 2000);
  EXPECT_FALSE(s.is_free(kPort));  // on the wall plane
  EXPECT_TRUE(s.is_free(kPort + Point3(0, 0, -10)));
  EXPECT_FALSE(s.is_free(kPort + Point3(0, 0, -150)));  // bladder centre
  EXPECT_FALSE(s.is_free(kPort + Point3(0, 260, -20)));
  EXPECT_EQ(s.active_primitive(kPort + Point3(0, 0, -150)), 1u);
  EXPECT_THROW(make_hemisphere_scene(500.0, 0.5, kPort, 300.0), Error);
  EXPECT_THROW(make_hemisphere_scene(500.0, 1.5, kPort), Error);
}

TEST(Scene, DegenerateConfigurationsRejected)
{
  auto cavity = ImplicitSurface::sphere(Point3::Zero(), 10.0);
  EXPECT_THROW(Scene("x", Point3(20, 0, 0), cavity, {}, std::nullopt, 10.0, 100), Error);
  EXPECT_THROW(Scene("x", Point3::Zero(), cavity, {ImplicitSurface::sphere(Point3::Zero(), 1.0)},
                     std::nullopt, 10.0, 100),
               Error);
}

TEST(Scene, BoundarySamplesLieOnExposedSurface)
{
  const auto s = make_hemisphere_scene(500.0, 0.5, kPort, 0.0, 3000);
  ASSERT_EQ(s.boundary_samples().size(), 3000u);
  std::size_t on_bladder = 0;
  for (std::size_t i = 0; i < s.boundary_samples().size(); ++i) {
    const auto& x = s.boundary_samples()[i];
    const auto owner = s.boundary_sample_owner()[i];
    EXPECT_NEAR(s.primitive(owner).value(x), 0.0, 1e-9);
    EXPECT_LT(x.z(), kPort.z());
    on_bladder += owner == 1;
  }
  // Expected share of the bladder: full sphere area over total exposed area.
  const double bladder = 4 * kPi * 75.0 * 75.0;
  const double cavity = 2 * kPi * 250.0 * 250.0;
  const double share = static_cast<double>(on_bladder) / 3000.0;
  EXPECT_NEAR(share, bladder / (bladder + cavity), 0.03);

  // Same seed, same samples.
  const auto t = make_hemisphere_scene(500.0, 0.5, kPort, 0.0, 3000);
  EXPECT_EQ(t.boundary_samples().front(), s.boundary_samples().front());
}

TEST(RayCast, MatchesClosedFormSphereIntersections)
{
  const auto s = make_hemisphere_scene(500.0, 0.5, kPort, 0.0, 100);
  const Point3 bladder_c = kPort + Point3(0, 0, -150);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const SphericalDirection dir(kPi / 2 + 0.01 + u(rng) * (kPi / 2 - 0.01), u(rng) * 2 * kPi * 0.999);
    const Vec3 e = dir.unit();
    const double expected =
        std::min(exit_distance(kPort, e, kPort, 250.0), entry_distance(kPort, e, bladder_c, 75.0));
    const auto hit = ray_cast(s, dir);
    EXPECT_NEAR(hit.r, expected, 1e-6);
    EXPECT_LT((hit.x - (kPort + hit.r * e)).norm(), 1e-9);
  }
  // Straight down meets the bladder top.
  EXPECT_NEAR(ray_cast(s, SphericalDirection(kPi, 0.0)).r, 75.0, 1e-6);
  EXPECT_EQ(ray_cast(s, SphericalDirection(kPi, 0.0)).primitive, 1u);
}

TEST(RayCast, NoHitWhenSceneIsOpen)
{
  // Cavity far larger than the marching range.
  const Scene s("open", Point3::Zero(), ImplicitSurface::sphere(Point3::Zero(), 1e5), {},
                std::nullopt, 1.0, 10);
  try {
    ray_cast(s, SphericalDirection(kPi, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoHit);
  }
}

TEST(RayGrid, CountsAndPoleMerge)
{
  const auto s = make_hemisphere_scene(500.0, 0.5, kPort, 0.0, 100);
  const auto g = cast_ray_grid(s, 10, 16);
  EXPECT_EQ(g.vertex_count(), 9u * 16u + 1u);
  EXPECT_EQ(g.triangles.size(), 8u * 16u * 2u + 16u);
  EXPECT_EQ(grid_vertex_index(10, 16, 9, 3), grid_vertex_index(10, 16, 9, 11));
  EXPECT_EQ(grid_vertex_index(10, 16, 2, 16), grid_vertex_index(10, 16, 2, 0));
  for (const auto& d : g.directions) {
    EXPECT_GT(d.theta, kPi / 2);
    EXPECT_LE(d.theta, kPi);
  }
  // Every edge of the closed disc interior is shared by two triangles except
  // along the outer ring.
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : g.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  int boundary = 0;
  for (const auto& [e, n] : edges) {
    EXPECT_LE(n, 2);
    boundary += n == 1;
  }
  EXPECT_EQ(boundary, 16);
}

TEST(PositionMesh, NormalsFaceFreeSpace)
{
  const auto s = make_hemisphere_scene(500.0, 0.5, kPort, 0.0, 100);
  const auto g = cast_ray_grid(s, 12, 24);
  const auto m = boundary_position_mesh(s, g);
  ASSERT_EQ(m.triangles.size(), m.normals.size());
  for (std::size_t i = 0; i < m.triangles.size(); ++i) {
    const auto& h = g.hits[static_cast<std::size_t>(m.triangles[i][0])];
    EXPECT_GT(m.normals[i].dot(s.free_side_gradient(h.primitive, h.x)), 0.0);
  }
}

TEST(Scene, CholecystectomyIsWellFormed)
{
  const auto s = make_cholecystectomy_scene(1000);
  EXPECT_EQ(s.primitive_count(), 3u);
  EXPECT_TRUE(s.is_free(s.port()));
  const auto g = cast_ray_grid(s, 8, 16);
  std::size_t on_organs = 0;
  for (const auto& h : g.hits) on_organs += h.primitive != 0;
  EXPECT_GT(on_organs, 0u);
}

TEST(Baseline, EdgeCost)
{
  const auto s = make_hemisphere_scene(500.0, 0.5, kPort, 0.0, 2000);
  const Point3 a = kPort + Point3(50, 0, -60), b = kPort + Point3(70, 10, -80);
  EXPECT_DOUBLE_EQ(baseline_edge_cost(a, b, s, 0.0), (b - a).norm());
  const double d = nearest_boundary_point(s, 0.5 * (a + b)).distance;
  EXPECT_NEAR(baseline_edge_cost(a, b, s, 5.0), (b - a).norm() * (1 + 5.0 / d), 1e-12);
  EXPECT_EQ(baseline_edge_cost(a, a, s, 5.0), 0.0);
  const auto& v = s.boundary_samples()[17];
  EXPECT_TRUE(std::isinf(baseline_edge_cost(v - Vec3(1, 0, 0), v + Vec3(1, 0, 0), s, 5.0)));
  EXPECT_THROW(baseline_edge_cost(a, b, s, -1.0), Error);
}

TEST(Kernels, ParallelMatchesSerial)
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vec3> pts(5000), qs(300);
  for (auto& p : pts) p = Vec3(n(rng), n(rng), n(rng));
  for (auto& q : qs) q = Vec3(n(rng), n(rng), n(rng));
  pts.push_back(pts[10]);  // duplicate: the lower index must win
  const auto a = kernels::nearest_batch_serial(pts, qs);
  const auto b = kernels::nearest_batch_parallel(pts, qs);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    EXPECT_EQ(a[i].index, b[i].index);
    EXPECT_EQ(a[i].dist_sq, b[i].dist_sq);
  }
  EXPECT_EQ(kernels::nearest_parallel(pts, pts[10]).index, 10u);
  const auto f = [&](std::size_t i) { return pts[i].norm(); };
  EXPECT_EQ(kernels::map_serial(pts.size(), f), kernels::map_parallel(pts.size(), f));
  EXPECT_THROW(kernels::map_parallel(100, [](std::size_t i) -> double {
                 if (i == 42) throw std::runtime_error("x");
                 return 0.0;
               }),
               std::runtime_error);
}
