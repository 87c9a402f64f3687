#pragma once

#include <algorithm>
#include <random>

namespace rmplan {

template <class Rng>
std::optional<Point3> ImplicitSurface::draw_surface_point(Rng& rng) const
{
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (form_) {
    case SurfaceForm::Sphere:
    case SurfaceForm::HemisphericalCavity: {
      const Vec3 d = Vec3(normal(rng), normal(rng), normal(rng)).normalized();
      return center_ + radii_.x() * d;
    }
    case SurfaceForm::Ellipsoid: {
      // Map the unit sphere and thin by the local area stretch.
      const Vec3 d = Vec3(normal(rng), normal(rng), normal(rng)).normalized();
      const double stretch = d.cwiseQuotient(radii_).norm();
      const double stretch_max = 1.0 / radii_.minCoeff();
      if (unit(rng) * stretch_max > stretch) return std::nullopt;
      return center_ + radii_.cwiseProduct(d);
    }
    case SurfaceForm::Union: {
      double total = 0.0;
      for (const auto& p : parts_) total += p.full_area();
      double pick = unit(rng) * total;
      for (const auto& p : parts_) {
        pick -= p.full_area();
        if (pick <= 0.0) return p.draw_surface_point(rng);
      }
      return parts_.back().draw_surface_point(rng);
    }
  }
  return std::nullopt;
}

}  // namespace rmplan
