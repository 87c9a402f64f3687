#pragma once

#include <vector>

#include "rmplan/arm_model.hpp"
#include "rmplan/joint_obstacle_map.hpp"

namespace rmplan {

/// Source of the implied wrist angles f(q) = q4, g(q) = q5 and their derivatives.
class KinematicField
{
public:
  virtual ~KinematicField() = default;
  virtual FgGradient gradient(const ReducedConfig& q) const = 0;
  virtual FgHessian hessian(const ReducedConfig& q) const = 0;
};

/// The arm's port constraint.
class ArmKinematicField : public KinematicField
{
public:
  ArmKinematicField(Point3 port, ArmGeometry arm) : port_(std::move(port)), arm_(std::move(arm)) {}

  FgGradient gradient(const ReducedConfig& q) const override { return grad_fg(q, port_, arm_); }
  FgHessian hessian(const ReducedConfig& q) const override { return hess_fg(q, port_, arm_); }

private:
  Point3 port_;
  ArmGeometry arm_;
};

/// f = a.q, g = b.q; a and b zero gives the flat metric.
class LinearKinematicField : public KinematicField
{
public:
  LinearKinematicField(const Vec3& a = Vec3::Zero(), const Vec3& b = Vec3::Zero()) : a_(a), b_(b) {}

  FgGradient gradient(const ReducedConfig&) const override { return {a_, b_}; }
  FgHessian hessian(const ReducedConfig&) const override { return {Mat3::Zero(), Mat3::Zero()}; }

private:
  Vec3 a_;
  Vec3 b_;
};

/// Nearest forbidden configuration q_a(q).
class ObstacleField
{
public:
  virtual ~ObstacleField() = default;
  virtual ReducedConfig nearest(const ReducedConfig& q) const = 0;
};

class MeshObstacleField : public ObstacleField
{
public:
  explicit MeshObstacleField(const BoundaryMesh& mesh) : mesh_(&mesh) {}
  ReducedConfig nearest(const ReducedConfig& q) const override
  {
    return nearest_forbidden_greedy(q, *mesh_).q_a;
  }

private:
  const BoundaryMesh* mesh_;
};

/// Fixed obstacle point, for tests.
class PointObstacleField : public ObstacleField
{
public:
  explicit PointObstacleField(const Vec3& q_a) : q_a_(q_a) {}
  ReducedConfig nearest(const ReducedConfig&) const override { return q_a_; }

private:
  ReducedConfig q_a_;
};

/// I + grad f grad f^T + grad g grad g^T.
Mat3 metric_kinematic(const FgGradient& grad);
Mat3 metric_kinematic(const ReducedConfig& qr, const Point3& port, const ArmGeometry& arm);

/// (sigma_q / |q - q_a|) I; zero when sigma_q = 0. Throws AtBoundary at q = q_a.
Mat3 metric_obstacle(const ReducedConfig& qr, const ReducedConfig& q_a, double sigma_q);

Mat3 metric_total(const ReducedConfig& qr, const BoundaryMesh& mesh, const Point3& port,
                  const ArmGeometry& arm, double sigma_q);

/// Composite metric G = G_q + G_obs. Either part may be switched off: no
/// kinematic field drops G_q (including its identity), no obstacle field or
/// sigma_q = 0 drops G_obs.
class RiemannianMetric
{
public:
  RiemannianMetric(const KinematicField* kinematic, const ObstacleField* obstacle, double sigma_q);

  Mat3 kinematic(const ReducedConfig& q) const;
  Mat3 obstacle(const ReducedConfig& q) const;
  Mat3 total(const ReducedConfig& q) const { return kinematic(q) + obstacle(q); }

  /// sigma_q / |q - q_a(q)|, 0 without an obstacle term; throws AtBoundary.
  double barrier(const ReducedConfig& q) const;

  double sigma_q() const { return sigma_q_; }
  const KinematicField* kinematic_field() const { return kinematic_; }
  const ObstacleField* obstacle_field() const { return obstacle_; }

private:
  const KinematicField* kinematic_;
  const ObstacleField* obstacle_;
  double sigma_q_;
};

/// Midpoint edge cost: |dq|_G(qm) (1 + sigma_q / |qm - q_a(qm)|); +inf on the boundary.
double edge_cost(const ReducedConfig& qa, const ReducedConfig& qb, const RiemannianMetric& metric);

double edge_cost(const ReducedConfig& qa, const ReducedConfig& qb, const BoundaryMesh& mesh,
                 const Point3& port, const ArmGeometry& arm, double sigma_q);

/// Trapezoidal length of the polyline through `samples` under the metric.
double path_length(const std::vector<ReducedConfig>& samples, const RiemannianMetric& metric);

struct GeodesicResidual
{
  Vec3 kinematic = Vec3::Zero();  // from the G_q part of the Lagrangian
  Vec3 obstacle = Vec3::Zero();   // from the G_obs part
  Vec3 total = Vec3::Zero();

  double norm() const { return total.norm(); }
};

/// Euler-Lagrange residual of the geodesic equation at (q, q', q''). The
/// nearest-point map is treated as locally constant.
GeodesicResidual geodesic_residual(const ReducedConfig& q, const Vec3& qd, const Vec3& qdd,
                                   const RiemannianMetric& metric);

/// Same with q' and q'' from central differences of a uniformly sampled
/// curve (spacing h) at interior index i.
GeodesicResidual geodesic_residual(const std::vector<ReducedConfig>& samples, double h, std::size_t i,
                                   const RiemannianMetric& metric);

}  // namespace rmplan
