#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmplan/types.hpp"

namespace rmplan {

enum class SurfaceForm { Sphere, Ellipsoid, HemisphericalCavity, Union };

const char* to_string(SurfaceForm form);

/// Analytic implicit surface, negative inside.
///
/// Sphere and hemispherical cavity use F = |x - c| - r; the cavity form only
/// counts the part of the sphere below `cut_z` as surface. Ellipsoids use
/// F = sum((x_i - c_i)^2 / a_i^2) - 1. A union is the minimum of its children.
class ImplicitSurface
{
public:
  static ImplicitSurface sphere(const Point3& center, double radius);
  static ImplicitSurface ellipsoid(const Point3& center, const Vec3& radii);
  static ImplicitSurface hemispherical_cavity(const Point3& center, double radius, double cut_z);
  static ImplicitSurface make_union(std::vector<ImplicitSurface> parts);

  SurfaceForm form() const { return form_; }
  const Point3& center() const { return center_; }
  const Vec3& radii() const { return radii_; }
  double cut_z() const { return cut_z_; }
  const std::vector<ImplicitSurface>& parts() const { return parts_; }

  double value(const Point3& x) const;
  Vec3 gradient(const Point3& x) const;
  Mat3 hessian(const Point3& x) const;

  /// True if `x` on the zero set belongs to the modelled surface patch.
  bool in_surface_domain(const Point3& x) const;

  /// Area of the full closed surface (ellipsoids: Thomsen's approximation).
  double full_area() const;

  /// Uniform point on the full closed surface; nullopt on a rejected draw.
  template <class Rng>
  std::optional<Point3> draw_surface_point(Rng& rng) const;

private:
  SurfaceForm form_ = SurfaceForm::Sphere;
  Point3 center_ = Point3::Zero();
  Vec3 radii_ = Vec3::Ones();
  double cut_z_ = 0.0;
  std::vector<ImplicitSurface> parts_;
};

struct SphericalDirection
{
  double theta = kPi;  // [pi/2, pi]
  double phi = 0.0;    // [0, 2 pi)

  SphericalDirection() = default;
  /// Throws InvalidArgument outside the half-sphere ranges.
  SphericalDirection(double theta, double phi);

  Vec3 unit() const;
};

/// Position-space environment seen from the trocar port.
///
/// Primitive 0 is the cavity; organs follow. The forbidden region is the
/// complement of the cavity interior together with every organ interior.
/// An optional body-wall plane at `wall_z` additionally forbids points at or
/// above it.
class Scene
{
public:
  Scene(std::string name, const Point3& port, ImplicitSurface cavity,
        std::vector<ImplicitSurface> organs, std::optional<double> wall_z, double reference_length,
        int boundary_samples, std::uint64_t sample_seed = 20240601);

  const std::string& name() const { return name_; }
  const Point3& port() const { return port_; }
  const ImplicitSurface& cavity() const { return cavity_; }
  const std::vector<ImplicitSurface>& organs() const { return organs_; }
  std::optional<double> wall_z() const { return wall_z_; }
  double reference_length() const { return reference_length_; }

  std::size_t primitive_count() const { return 1 + organs_.size(); }
  const ImplicitSurface& primitive(std::size_t i) const { return i == 0 ? cavity_ : organs_[i - 1]; }

  /// Positive inside the forbidden region, negative in free space (wall excluded).
  double forbidden_value(const Point3& x) const;
  /// Index of the primitive attaining forbidden_value.
  std::size_t active_primitive(const Point3& x) const;

  /// Primitive function oriented so its gradient points into free space.
  double free_side_value(std::size_t primitive, const Point3& x) const;
  Vec3 free_side_gradient(std::size_t primitive, const Point3& x) const;
  Mat3 free_side_hessian(std::size_t primitive, const Point3& x) const;

  bool is_free(const Point3& x) const;

  /// True if no organ touches the closed segment [a, b] and the segment stays
  /// inside the cavity. The wall plane is not tested.
  bool segment_clear(const Point3& a, const Point3& b) const;

  /// Free tip position that the shaft reaches from the port without passing
  /// through an organ, i.e. closer than the first boundary hit along its ray.
  bool is_visible_free(const Point3& x) const;

  /// Axis-aligned box that contains the free region.
  std::pair<Point3, Point3> free_bounds() const;

  const std::vector<Point3>& boundary_samples() const { return samples_; }
  const std::vector<std::size_t>& boundary_sample_owner() const { return sample_owner_; }

private:
  std::string name_;
  Point3 port_;
  ImplicitSurface cavity_;
  std::vector<ImplicitSurface> organs_;
  std::optional<double> wall_z_;
  double reference_length_;
  std::vector<Point3> samples_;
  std::vector<std::size_t> sample_owner_;
};

/// Hemispherical cavity of radius k L centred d above the port, with the
/// mimic bladder sphere (radius 0.15 L) 0.3 L below the port.
Scene make_hemisphere_scene(double forceps_length, double k, const Point3& port, double d = 0.0,
                            int boundary_samples = 5000);

Scene make_cholecystectomy_scene(int boundary_samples = 5000);

struct RayHit
{
  double r = 0.0;
  Point3 x;
  std::size_t primitive = 0;
};

/// First boundary crossing along port + t e: 1 mm march then bisection.
RayHit ray_cast(const Scene& scene, const SphericalDirection& dir);

struct BoundaryPoint
{
  Point3 x;
  double distance = 0.0;
  std::size_t index = 0;
};

BoundaryPoint nearest_boundary_point(const Scene& scene, const Point3& x);

/// Position-space edge cost with the clearance barrier at the midpoint.
double baseline_edge_cost(const Point3& xa, const Point3& xb, const Scene& scene, double sigma_x);

/// Uniform (theta, phi) grid of ray hits. Row n_theta-1 is the pole theta = pi,
/// which is merged into a single vertex; the horizon theta = pi/2 is excluded.
struct RayGrid
{
  int n_theta = 0;
  int n_phi = 0;
  std::vector<SphericalDirection> directions;  // one per merged vertex
  std::vector<RayHit> hits;
  std::vector<std::array<int, 3>> triangles;   // parameter-domain triangulation

  std::size_t vertex_count() const { return hits.size(); }
};

RayGrid cast_ray_grid(const Scene& scene, int n_theta, int n_phi);

/// Index of grid vertex (i, j); all pole entries map to the same vertex.
int grid_vertex_index(int n_theta, int n_phi, int i, int j);

/// Triangle mesh of the boundary in position space with unit normals
/// pointing into free space.
struct PositionMesh
{
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> normals;
};

PositionMesh boundary_position_mesh(const Scene& scene, const RayGrid& grid);

}  // namespace rmplan

#include "rmplan/scene_impl.hpp"
