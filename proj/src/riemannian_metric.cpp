#include "rmplan/riemannian_metric.hpp"

#include <cmath>
#include <limits>

#include "rmplan/error.hpp"

namespace rmplan {

Mat3 metric_kinematic(const FgGradient& grad)
{
  return Mat3::Identity() + grad.grad_f * grad.grad_f.transpose() +
         grad.grad_g * grad.grad_g.transpose();
}

Mat3 metric_kinematic(const ReducedConfig& qr, const Point3& port, const ArmGeometry& arm)
{
  return metric_kinematic(grad_fg(qr, port, arm));
}

Mat3 metric_obstacle(const ReducedConfig& qr, const ReducedConfig& q_a, double sigma_q)
{
  if (!(sigma_q >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_q must be >= 0");
  if (sigma_q == 0.0) return Mat3::Zero();
  const double d = (qr.q - q_a.q).norm();
  if (d == 0.0) throw Error(ErrorCode::AtBoundary, "configuration lies on the forbidden boundary");
  return (sigma_q / d) * Mat3::Identity();
}

Mat3 metric_total(const ReducedConfig& qr, const BoundaryMesh& mesh, const Point3& port,
                  const ArmGeometry& arm, double sigma_q)
{
  const ArmKinematicField kin(port, arm);
  const MeshObstacleField obs(mesh);
  return RiemannianMetric(&kin, &obs, sigma_q).total(qr);
}

RiemannianMetric::RiemannianMetric(const KinematicField* kinematic, const ObstacleField* obstacle,
                                   double sigma_q)
    : kinematic_(kinematic), obstacle_(obstacle), sigma_q_(sigma_q)
{
  if (!(sigma_q >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_q must be >= 0");
}

Mat3 RiemannianMetric::kinematic(const ReducedConfig& q) const
{
  if (!kinematic_) return Mat3::Zero();
  return metric_kinematic(kinematic_->gradient(q));
}

Mat3 RiemannianMetric::obstacle(const ReducedConfig& q) const
{
  if (!obstacle_ || sigma_q_ == 0.0) return Mat3::Zero();
  return metric_obstacle(q, obstacle_->nearest(q), sigma_q_);
}

double RiemannianMetric::barrier(const ReducedConfig& q) const
{
  if (!obstacle_ || sigma_q_ == 0.0) return 0.0;
  const double d = (q.q - obstacle_->nearest(q).q).norm();
  if (d == 0.0) throw Error(ErrorCode::AtBoundary, "configuration lies on the forbidden boundary");
  return sigma_q_ / d;
}

double edge_cost(const ReducedConfig& qa, const ReducedConfig& qb, const RiemannianMetric& metric)
{
  const Vec3 dq = qb.q - qa.q;
  if (dq.isZero(0.0)) return 0.0;
  const ReducedConfig mid(0.5 * (qa.q + qb.q));
  double factor = 0.0;
  try {
    factor = metric.barrier(mid);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AtBoundary) return std::numeric_limits<double>::infinity();
    throw;
  }
  const Mat3 g = metric.kinematic(mid) + factor * Mat3::Identity();
  return std::sqrt(dq.dot(g * dq)) * (1.0 + factor);
}

double edge_cost(const ReducedConfig& qa, const ReducedConfig& qb, const BoundaryMesh& mesh,
                 const Point3& port, const ArmGeometry& arm, double sigma_q)
{
  const ArmKinematicField kin(port, arm);
  const MeshObstacleField obs(mesh);
  return edge_cost(qa, qb, RiemannianMetric(&kin, &obs, sigma_q));
}

double path_length(const std::vector<ReducedConfig>& samples, const RiemannianMetric& metric)
{
  if (samples.size() < 2) throw Error(ErrorCode::InvalidArgument, "path needs at least 2 samples");
  double len = 0.0;
  Mat3 g_prev = metric.total(samples.front());
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const Vec3 dq = samples[i + 1].q - samples[i].q;
    const Mat3 g_next = metric.total(samples[i + 1]);
    len += 0.5 * (std::sqrt(dq.dot(g_prev * dq)) + std::sqrt(dq.dot(g_next * dq)));
    g_prev = g_next;
  }
  return len;
}

GeodesicResidual geodesic_residual(const ReducedConfig& q, const Vec3& qd, const Vec3& qdd,
                                   const RiemannianMetric& metric)
{
  GeodesicResidual r;
  if (const auto* kin = metric.kinematic_field()) {
    const auto grad = kin->gradient(q);
    const auto hess = kin->hessian(q);
    r.kinematic = metric_kinematic(grad) * qdd + grad.grad_f * qd.dot(hess.hess_f * qd) +
                  grad.grad_g * qd.dot(hess.hess_g * qd);
  }
  if (const auto* obs = metric.obstacle_field(); obs && metric.sigma_q() > 0.0) {
    const Vec3 diff = q.q - obs->nearest(q).q;
    const double d = diff.norm();
    if (d == 0.0) throw Error(ErrorCode::AtBoundary, "configuration lies on the forbidden boundary");
    const double s = metric.sigma_q();
    const Mat3 bracket = qd * qd.transpose() - 0.5 * qd.squaredNorm() * Mat3::Identity();
    r.obstacle = (s / d) * qdd - (s / (d * d * d)) * (bracket * diff);
  }
  r.total = r.kinematic + r.obstacle;
  return r;
}

GeodesicResidual geodesic_residual(const std::vector<ReducedConfig>& samples, double h, std::size_t i,
                                   const RiemannianMetric& metric)
{
  if (i == 0 || i + 1 >= samples.size())
    throw Error(ErrorCode::InvalidArgument, "residual needs an interior sample index");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample spacing must be positive");
  const Vec3& a = samples[i - 1].q;
  const Vec3& b = samples[i].q;
  const Vec3& c = samples[i + 1].q;
  return geodesic_residual(samples[i], (c - a) / (2.0 * h), (c - 2.0 * b + a) / (h * h), metric);
}

}  // namespace rmplan
