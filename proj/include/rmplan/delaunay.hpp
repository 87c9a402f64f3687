#pragma once

#include <array>
#include <utility>
#include <vector>

#include "rmplan/types.hpp"

namespace rmplan {

struct Tetrahedralization
{
  std::vector<std::array<int, 4>> tets;    // positively oriented, input indices
  std::vector<std::pair<int, int>> edges;  // a < b, sorted
};

/// 3D Delaunay tetrahedralization by incremental Bowyer-Watson insertion.
/// Cospherical and coplanar ties are broken by a fixed index-dependent
/// perturbation of relative size ~1e-10, so the result is deterministic.
/// Throws DegenerateInput on fewer than 4 points, duplicates, or a flat set.
Tetrahedralization delaunay3(const std::vector<Vec3>& points);

/// Circumcentre and squared radius of a tetrahedron.
std::pair<Vec3, double> circumsphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Signed volume times 6.
double orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

}  // namespace rmplan
