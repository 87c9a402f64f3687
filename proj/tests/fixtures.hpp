#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rmplan/joint_obstacle_map.hpp"
#include "rmplan/scene.hpp"

namespace rmplan::fixtures {

inline const Point3 kPort(750.0, 0.0, -300.0);
inline const Point3 kStart(705.0, -26.0, -330.0);
inline const Point3 kGoal(656.0, -26.0, -378.0);

inline Scene hemisphere()
{
  return make_hemisphere_scene(500.0, 0.5, kPort, 0.0, 5000);
}

inline BoundaryMesh segmented_boundary(const Scene& scene, const ArmGeometry& arm, int nt, int np)
{
  auto mesh = build_boundary(scene, arm, nt, np);
  classify_curvature(mesh, scene, arm);
  segment_convex_patches(mesh);
  return mesh;
}

/// Joint configurations of random tips in the box below the port that the
/// port can see without touching an organ.
inline std::vector<ReducedConfig> visible_free_queries(const Scene& scene, const ArmGeometry& arm,
                                                       int count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ReducedConfig> out;
  while (static_cast<int>(out.size()) < count) {
    const Point3 x = scene.port() + Vec3(250 * u(rng), 250 * u(rng), -125 * (u(rng) + 1));
    if (!scene.is_visible_free(x)) continue;
    if (auto q = try_inverse_kinematics(x, scene.port(), arm)) out.push_back(q->reduced());
  }
  return out;
}

/// Bladder vertices that are the nearest forbidden vertex of some free tip
/// within `radius` mm of the start-goal segment.
inline std::vector<std::size_t> corridor_vertices(const Scene& scene, const ArmGeometry& arm,
                                                  const BoundaryMesh& mesh, double radius,
                                                  std::uint64_t seed = 1)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<bool> hit(mesh.size(), false);
  for (int k = 0; k < 4000; ++k) {
    const double t = (u(rng) + 1) / 2;
    const Vec3 off(u(rng), u(rng), u(rng));
    if (off.norm() > 1.0) continue;
    const Point3 x = kStart + t * (kGoal - kStart) + radius * off;
    if (!scene.is_visible_free(x)) continue;
    const auto q = try_inverse_kinematics(x, scene.port(), arm);
    if (!q) continue;
    const auto nf = nearest_forbidden_bruteforce(q->reduced(), mesh);
    if (mesh.vertices[nf.index].primitive != 0) hit[nf.index] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < hit.size(); ++i)
    if (hit[i]) out.push_back(i);
  return out;
}

}  // namespace rmplan::fixtures
