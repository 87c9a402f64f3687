#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "rmplan/arm_model.hpp"
#include "rmplan/scene.hpp"

namespace rmplan {

struct CurvatureSample
{
  double K = 0.0;
  double H = 0.0;
  bool nonconcave = false;
};

/// Gaussian and mean curvature of the level set of a function with the given
/// gradient and Hessian. H > 0 where the surface bends away from the side the
/// gradient points to.
CurvatureSample implicit_curvature(const Vec3& grad, const Mat3& hess);

struct BoundaryVertex
{
  ReducedConfig q;
  JointConfig lifted;
  double theta = 0.0;
  double phi = 0.0;
  double r = 0.0;
  Point3 x;                   // position-space source point
  std::size_t primitive = 0;  // scene primitive hit by the ray
  int grid_i = 0;
  int grid_j = 0;
};

struct SkippedDirection
{
  double theta = 0.0;
  double phi = 0.0;
  Point3 x;
};

/// Piecewise-linear image of the position-space boundary in (q1, q2, q3).
struct BoundaryMesh
{
  std::vector<BoundaryVertex> vertices;
  std::vector<Vec3> points;  // vertices[i].q.q, contiguous for scans
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::vector<int>> adjacency;
  std::vector<CurvatureSample> curvature;  // filled by classify_curvature
  std::vector<Vec3> normals;               // unit pulled-back gradient, towards free space
  std::vector<int> patch_id;               // filled by segment_convex_patches
  std::vector<bool> patch_convex;          // per patch: greedy-searchable
  std::vector<int> patch_seed;             // per patch: greedy start vertex
  std::vector<SkippedDirection> skipped;   // grid rays without an in-limit IK
  int n_theta = 0;
  int n_phi = 0;

  std::size_t size() const { return vertices.size(); }
  std::size_t patch_count() const { return patch_seed.size(); }
};

struct BuildOptions
{
  /// Throw IKFailure instead of dropping unreachable grid points.
  bool strict = false;
};

/// Casts the (theta, phi) grid, maps every hit to joint space and keeps the
/// parameter-domain triangulation on the reachable vertices.
BoundaryMesh build_boundary(const Scene& scene, const ArmGeometry& arm, int n_theta, int n_phi,
                            const BuildOptions& opts = {});

/// Curvature of the pulled-back boundary primitive at a mesh vertex.
CurvatureSample curvature_at(const BoundaryVertex& v, const Scene& scene, const ArmGeometry& arm);

/// Same with the identity map in place of the kinematics: the surface's own
/// curvature, using the free-side orientation.
CurvatureSample curvature_identity(const Scene& scene, std::size_t primitive, const Point3& x);

void classify_curvature(BoundaryMesh& mesh, const Scene& scene, const ArmGeometry& arm);

inline constexpr double kDihedralTolerance = 1e-6;

/// Region growing over nonconcave vertices joined by convex edges. Concave
/// vertices become singleton residual patches. Requires curvature.
void segment_convex_patches(BoundaryMesh& mesh, double eps_dihedral = kDihedralTolerance);

/// Unit normal of triangle t, oriented like the vertex normals.
Vec3 triangle_normal(const BoundaryMesh& mesh, std::size_t t);

struct NearestForbidden
{
  ReducedConfig q_a;
  double distance = 0.0;
  std::size_t index = 0;
};

/// Greedy descent from each convex patch seed plus exhaustive scan of the
/// residual vertices. Requires a segmented mesh.
NearestForbidden nearest_forbidden_greedy(const ReducedConfig& q, const BoundaryMesh& mesh);

NearestForbidden nearest_forbidden_bruteforce(const ReducedConfig& q, const BoundaryMesh& mesh);

std::vector<NearestForbidden> nearest_forbidden_batch_serial(const std::vector<ReducedConfig>& qs,
                                                             const BoundaryMesh& mesh);
std::vector<NearestForbidden> nearest_forbidden_batch_parallel(const std::vector<ReducedConfig>& qs,
                                                               const BoundaryMesh& mesh);

/// Rebuilds adjacency from the triangle list (sorted, symmetric).
void rebuild_adjacency(BoundaryMesh& mesh);

}  // namespace rmplan
