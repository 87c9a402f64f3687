#include "rmplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rmplan/error.hpp"
#include "rmplan/kernels.hpp"

namespace rmplan {

const char* to_string(SurfaceForm form)
{
  switch (form) {
    case SurfaceForm::Sphere: return "sphere";
    case SurfaceForm::Ellipsoid: return "ellipsoid";
    case SurfaceForm::HemisphericalCavity: return "hemispherical_cavity";
    case SurfaceForm::Union: return "union";
  }
  return "unknown";
}

ImplicitSurface ImplicitSurface::sphere(const Point3& center, double radius)
{
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
  ImplicitSurface s;
  s.form_ = SurfaceForm::Sphere;
  s.center_ = center;
  s.radii_ = Vec3::Constant(radius);
  return s;
}

ImplicitSurface ImplicitSurface::ellipsoid(const Point3& center, const Vec3& radii)
{
  if (!(radii.minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "ellipsoid radii must be positive");
  ImplicitSurface s;
  s.form_ = SurfaceForm::Ellipsoid;
  s.center_ = center;
  s.radii_ = radii;
  return s;
}

ImplicitSurface ImplicitSurface::hemispherical_cavity(const Point3& center, double radius, double cut_z)
{
  ImplicitSurface s = sphere(center, radius);
  s.form_ = SurfaceForm::HemisphericalCavity;
  s.cut_z_ = cut_z;
  return s;
}

ImplicitSurface ImplicitSurface::make_union(std::vector<ImplicitSurface> parts)
{
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "empty union");
  ImplicitSurface s;
  s.form_ = SurfaceForm::Union;
  s.parts_ = std::move(parts);
  return s;
}

namespace {

const ImplicitSurface& active_part(const ImplicitSurface& u, const Point3& x)
{
  const ImplicitSurface* best = &u.parts().front();
  double v = best->value(x);
  for (const auto& p : u.parts()) {
    const double pv = p.value(x);
    if (pv < v) {
      v = pv;
      best = &p;
    }
  }
  return *best;
}

}  // namespace

double ImplicitSurface::value(const Point3& x) const
{
  switch (form_) {
    case SurfaceForm::Sphere:
    case SurfaceForm::HemisphericalCavity: return (x - center_).norm() - radii_.x();
    case SurfaceForm::Ellipsoid: return (x - center_).cwiseQuotient(radii_).squaredNorm() - 1.0;
    case SurfaceForm::Union: return active_part(*this, x).value(x);
  }
  return 0.0;
}

Vec3 ImplicitSurface::gradient(const Point3& x) const
{
  switch (form_) {
    case SurfaceForm::Sphere:
    case SurfaceForm::HemisphericalCavity: {
      const Vec3 d = x - center_;
      const double n = d.norm();
      if (n == 0.0) return Vec3::Zero();
      return d / n;
    }
    case SurfaceForm::Ellipsoid:
      return 2.0 * (x - center_).cwiseQuotient(radii_.cwiseProduct(radii_));
    case SurfaceForm::Union: return active_part(*this, x).gradient(x);
  }
  return Vec3::Zero();
}

Mat3 ImplicitSurface::hessian(const Point3& x) const
{
  switch (form_) {
    case SurfaceForm::Sphere:
    case SurfaceForm::HemisphericalCavity: {
      const Vec3 d = x - center_;
      const double n = d.norm();
      if (n == 0.0) return Mat3::Zero();
      const Vec3 u = d / n;
      return (Mat3::Identity() - u * u.transpose()) / n;
    }
    case SurfaceForm::Ellipsoid:
      return (2.0 * radii_.cwiseProduct(radii_).cwiseInverse()).asDiagonal();
    case SurfaceForm::Union: return active_part(*this, x).hessian(x);
  }
  return Mat3::Zero();
}

bool ImplicitSurface::in_surface_domain(const Point3& x) const
{
  switch (form_) {
    case SurfaceForm::HemisphericalCavity: return x.z() < cut_z_;
    case SurfaceForm::Union: {
      const auto& self = active_part(*this, x);
      for (const auto& p : parts_)
        if (&p != &self && p.value(x) < 0.0) return false;
      return self.in_surface_domain(x);
    }
    default: return true;
  }
}

double ImplicitSurface::full_area() const
{
  switch (form_) {
    case SurfaceForm::Sphere:
    case SurfaceForm::HemisphericalCavity: return 4.0 * kPi * radii_.x() * radii_.x();
    case SurfaceForm::Ellipsoid: {
      constexpr double p = 1.6075;
      const double a = std::pow(radii_.x(), p), b = std::pow(radii_.y(), p), c = std::pow(radii_.z(), p);
      return 4.0 * kPi * std::pow((a * b + a * c + b * c) / 3.0, 1.0 / p);
    }
    case SurfaceForm::Union: {
      double s = 0.0;
      for (const auto& q : parts_) s += q.full_area();
      return s;
    }
  }
  return 0.0;
}

SphericalDirection::SphericalDirection(double t, double p) : theta(t), phi(p)
{
  if (!(theta >= kPi / 2 && theta <= kPi) || !(phi >= 0.0 && phi < 2.0 * kPi))
    throw Error(ErrorCode::InvalidArgument, "direction outside the lower half-sphere");
}

Vec3 SphericalDirection::unit() const
{
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

// ---------------------------------------------------------------------------

Scene::Scene(std::string name, const Point3& port, ImplicitSurface cavity,
             std::vector<ImplicitSurface> organs, std::optional<double> wall_z,
             double reference_length, int boundary_samples, std::uint64_t sample_seed)
    : name_(std::move(name)),
      port_(port),
      cavity_(std::move(cavity)),
      organs_(std::move(organs)),
      wall_z_(wall_z),
      reference_length_(reference_length)
{
  if (!(reference_length_ > 0.0))
    throw Error(ErrorCode::DegenerateScene, "reference length must be positive");
  if (!(cavity_.value(port_) < 0.0))
    throw Error(ErrorCode::DegenerateScene, "port must lie strictly inside the cavity");
  for (const auto& o : organs_)
    if (!(o.value(port_) > 0.0)) throw Error(ErrorCode::DegenerateScene, "port lies inside an organ");
  if (boundary_samples < 4)
    throw Error(ErrorCode::DegenerateScene, "need at least 4 boundary samples");

  // Area-weighted draws over all primitives, kept only where they bound the
  // free region.
  std::mt19937_64 rng(sample_seed);
  std::vector<double> areas;
  double total = 0.0;
  for (std::size_t i = 0; i < primitive_count(); ++i) {
    areas.push_back(primitive(i).full_area());
    total += areas.back();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t budget = static_cast<std::size_t>(boundary_samples) * 2000;
  std::size_t draws = 0;
  while (samples_.size() < static_cast<std::size_t>(boundary_samples)) {
    if (++draws > budget)
      throw Error(ErrorCode::DegenerateScene, "boundary sampling exhausted its draw budget");
    double pick = unit(rng) * total;
    std::size_t owner = 0;
    for (; owner + 1 < areas.size(); ++owner) {
      pick -= areas[owner];
      if (pick <= 0.0) break;
    }
    const auto& prim = primitive(owner);
    const auto x = prim.draw_surface_point(rng);
    if (!x || !prim.in_surface_domain(*x)) continue;
    if (wall_z_ && x->z() >= *wall_z_) continue;
    bool exposed = true;
    for (std::size_t j = 0; j < primitive_count() && exposed; ++j) {
      if (j == owner) continue;
      // Free side of every other primitive: inside the cavity, outside organs.
      exposed = j == 0 ? cavity_.value(*x) < 0.0 : primitive(j).value(*x) > 0.0;
    }
    if (!exposed) continue;
    samples_.push_back(*x);
    sample_owner_.push_back(owner);
  }
}

double Scene::forbidden_value(const Point3& x) const
{
  double v = cavity_.value(x);
  for (const auto& o : organs_) v = std::max(v, -o.value(x));
  return v;
}

std::size_t Scene::active_primitive(const Point3& x) const
{
  double v = cavity_.value(x);
  std::size_t best = 0;
  for (std::size_t i = 0; i < organs_.size(); ++i) {
    const double ov = -organs_[i].value(x);
    if (ov > v) {
      v = ov;
      best = i + 1;
    }
  }
  return best;
}

double Scene::free_side_value(std::size_t i, const Point3& x) const
{
  return i == 0 ? -cavity_.value(x) : primitive(i).value(x);
}

Vec3 Scene::free_side_gradient(std::size_t i, const Point3& x) const
{
  return i == 0 ? Vec3(-cavity_.gradient(x)) : primitive(i).gradient(x);
}

Mat3 Scene::free_side_hessian(std::size_t i, const Point3& x) const
{
  return i == 0 ? Mat3(-cavity_.hessian(x)) : primitive(i).hessian(x);
}

bool Scene::is_free(const Point3& x) const
{
  if (wall_z_ && !(x.z() < *wall_z_)) return false;
  return forbidden_value(x) < 0.0;
}

namespace {

// Closest approach of the segment [a, b] to the origin.
double segment_origin_distance(const Vec3& a, const Vec3& b)
{
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp(-a.dot(d) / len2, 0.0, 1.0) : 0.0;
  return (a + t * d).norm();
}

// True if the closed segment meets the closed solid bounded by s.
bool segment_meets_solid(const ImplicitSurface& s, const Point3& a, const Point3& b)
{
  if (s.form() == SurfaceForm::Union) {
    for (const auto& p : s.parts())
      if (segment_meets_solid(p, a, b)) return true;
    return false;
  }
  const Vec3 ua = (a - s.center()).cwiseQuotient(s.radii());
  const Vec3 ub = (b - s.center()).cwiseQuotient(s.radii());
  return segment_origin_distance(ua, ub) <= 1.0;
}

bool segment_inside_solid(const ImplicitSurface& s, const Point3& a, const Point3& b)
{
  if (s.form() != SurfaceForm::Union) return s.value(a) < 0.0 && s.value(b) < 0.0;
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
  for (int k = 0; k <= steps; ++k)
    if (!(s.value(a + (b - a) * (static_cast<double>(k) / steps)) < 0.0)) return false;
  return true;
}

}  // namespace

bool Scene::segment_clear(const Point3& a, const Point3& b) const
{
  if (!segment_inside_solid(cavity_, a, b)) return false;
  for (const auto& o : organs_)
    if (segment_meets_solid(o, a, b)) return false;
  return true;
}

bool Scene::is_visible_free(const Point3& x) const
{
  return is_free(x) && segment_clear(port_, x);
}

namespace {

std::pair<Point3, Point3> surface_bounds(const ImplicitSurface& s)
{
  if (s.form() == SurfaceForm::Union) {
    auto b = surface_bounds(s.parts().front());
    for (const auto& p : s.parts()) {
      const auto pb = surface_bounds(p);
      b.first = b.first.cwiseMin(pb.first);
      b.second = b.second.cwiseMax(pb.second);
    }
    return b;
  }
  return {s.center() - s.radii(), s.center() + s.radii()};
}

}  // namespace

std::pair<Point3, Point3> Scene::free_bounds() const
{
  auto b = surface_bounds(cavity_);
  if (wall_z_) b.second.z() = std::min(b.second.z(), *wall_z_);
  return b;
}

Scene make_hemisphere_scene(double forceps_length, double k, const Point3& port, double d,
                            int boundary_samples)
{
  if (!(k > 0.0 && k <= 1.0)) throw Error(ErrorCode::DegenerateScene, "k must lie in (0, 1]");
  if (!(forceps_length > 0.0)) throw Error(ErrorCode::DegenerateScene, "L must be positive");
  const double radius = k * forceps_length;
  if (!(std::abs(d) < radius)) throw Error(ErrorCode::DegenerateScene, "|d| must be below R");
  auto cavity = ImplicitSurface::hemispherical_cavity(port + Point3(0.0, 0.0, d), radius, port.z());
  auto bladder =
      ImplicitSurface::sphere(port + Point3(0.0, 0.0, -0.3 * forceps_length), 0.15 * forceps_length);
  return Scene("hemisphere", port, std::move(cavity), {std::move(bladder)}, port.z(), forceps_length,
               boundary_samples);
}

Scene make_cholecystectomy_scene(int boundary_samples)
{
  // The ellipsoid passes through the nominal port; the pivot sits 10 mm
  // inside the wall so rays towards the horizon start in free space.
  const Point3 nominal_port(750.0, 0.0, -300.0);
  const double s3 = std::sqrt(3.0);
  auto cavity = ImplicitSurface::ellipsoid(nominal_port + Point3(-100.0, 0.0, -50.0 * s3),
                                           Vec3(200.0, 200.0, 100.0));
  auto liver = ImplicitSurface::ellipsoid(Point3(500.0, 0.0, -320.0 - 50.0 * s3), Vec3(50.0, 60.0, 60.0));
  auto gallbladder =
      ImplicitSurface::ellipsoid(Point3(520.0, 0.0, -370.0 - 50.0 * s3), Vec3(50.0, 20.0, 20.0));
  return Scene("cholecystectomy", nominal_port + Point3(0.0, 0.0, -10.0), std::move(cavity),
               {std::move(liver), std::move(gallbladder)}, std::nullopt, 500.0, boundary_samples);
}

RayHit ray_cast(const Scene& scene, const SphericalDirection& dir)
{
  const Vec3 e = dir.unit();
  const Point3& p = scene.port();
  const double t_max = 4.0 * scene.reference_length();
  constexpr double step = 1.0;
  double lo = 0.0;
  double hi = -1.0;
  for (double t = step; t <= t_max + 1e-12; t += step) {
    if (scene.forbidden_value(p + t * e) >= 0.0) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) throw Error(ErrorCode::NoHit, "ray leaves the scene without crossing the boundary");
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (scene.forbidden_value(p + mid * e) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  RayHit hit;
  hit.r = 0.5 * (lo + hi);
  hit.x = p + hit.r * e;
  hit.primitive = scene.active_primitive(hit.x);
  return hit;
}

BoundaryPoint nearest_boundary_point(const Scene& scene, const Point3& x)
{
  const auto& s = scene.boundary_samples();
  if (s.empty()) throw Error(ErrorCode::EmptySampleSet, "no boundary samples");
  const auto hit = kernels::nearest_serial(s, x);
  return {s[hit.index], std::sqrt(hit.dist_sq), hit.index};
}

double baseline_edge_cost(const Point3& xa, const Point3& xb, const Scene& scene, double sigma_x)
{
  if (!(sigma_x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_x must be >= 0");
  const double len = (xb - xa).norm();
  if (len == 0.0) return 0.0;
  if (sigma_x == 0.0) return len;
  const double d = nearest_boundary_point(scene, 0.5 * (xa + xb)).distance;
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  return len * (1.0 + sigma_x / d);
}

int grid_vertex_index(int n_theta, int n_phi, int i, int j)
{
  if (i == n_theta - 1) return (n_theta - 1) * n_phi;
  return i * n_phi + ((j % n_phi) + n_phi) % n_phi;
}

RayGrid cast_ray_grid(const Scene& scene, int n_theta, int n_phi)
{
  if (n_theta < 4 || n_phi < 8) throw Error(ErrorCode::InvalidArgument, "grid must be at least (4, 8)");
  RayGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  const std::size_t n = static_cast<std::size_t>((n_theta - 1) * n_phi + 1);
  g.directions.resize(n);
  for (int i = 0; i < n_theta; ++i) {
    const double theta = i == n_theta - 1 ? kPi : kPi / 2 + (i + 1) * (kPi / 2) / n_theta;
    const int cols = i == n_theta - 1 ? 1 : n_phi;
    for (int j = 0; j < cols; ++j)
      g.directions[static_cast<std::size_t>(grid_vertex_index(n_theta, n_phi, i, j))] =
          SphericalDirection(theta, 2.0 * kPi * j / n_phi);
  }
  g.hits.resize(n);
  for (std::size_t v = 0; v < n; ++v) g.hits[v] = ray_cast(scene, g.directions[v]);

  for (int i = 0; i + 1 < n_theta; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const int a = grid_vertex_index(n_theta, n_phi, i, j);
      const int b = grid_vertex_index(n_theta, n_phi, i, j + 1);
      const int c = grid_vertex_index(n_theta, n_phi, i + 1, j);
      const int d = grid_vertex_index(n_theta, n_phi, i + 1, j + 1);
      if (i + 1 == n_theta - 1) {
        g.triangles.push_back({a, b, c});
      } else {
        g.triangles.push_back({a, b, d});
        g.triangles.push_back({a, d, c});
      }
    }
  }
  return g;
}

PositionMesh boundary_position_mesh(const Scene& scene, const RayGrid& grid)
{
  PositionMesh m;
  for (const auto& h : grid.hits) m.vertices.push_back(h.x);
  for (const auto& t : grid.triangles) {
    const Point3& a = m.vertices[static_cast<std::size_t>(t[0])];
    const Point3& b = m.vertices[static_cast<std::size_t>(t[1])];
    const Point3& c = m.vertices[static_cast<std::size_t>(t[2])];
    Vec3 n = (b - a).cross(c - a);
    if (n.norm() < 1e-12) continue;
    n.normalize();
    const Point3 centroid = (a + b + c) / 3.0;
    // Orient by the free-side gradient of the primitive under the centroid.
    Vec3 ref = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      const auto& h = grid.hits[static_cast<std::size_t>(t[k])];
      ref += scene.free_side_gradient(h.primitive, h.x).normalized();
    }
    if (ref.squaredNorm() < 1e-12) ref = scene.port() - centroid;
    if (n.dot(ref) < 0.0) n = -n;
    m.triangles.push_back(t);
    m.normals.push_back(n);
  }
  return m;
}

}  // namespace rmplan
