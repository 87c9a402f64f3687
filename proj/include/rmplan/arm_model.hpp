#pragma once

#include <array>
#include <optional>
#include <utility>

#include "rmplan/types.hpp"

namespace rmplan {

struct JointRange
{
  double min = 0.0;  // rad
  double max = 0.0;  // rad

  bool contains(double q, double tol = 1e-12) const { return q >= min - tol && q <= max + tol; }
};

/// Default ranges of the 5-DOF holder arm, horizontal plane at 0.
std::array<JointRange, 5> default_joint_limits();

/// Holder-arm geometry. The shoulder sits at `base`; q1 is base yaw, q2 and
/// q3 are the elevations of upper arm and forearm above the horizontal
/// (forearm kept by a parallel link), q4 is wrist yaw measured from the
/// direction `wrist_yaw_offset` relative to the arm plane, and q5 is the
/// forceps pitch below the horizontal. Joint 5 sits at (d_x, -d_z) from the
/// elbow-end in the wrist frame; the forceps shaft of length L starts there.
struct ArmGeometry
{
  double l2 = 400.0;
  double l3 = 400.0;
  double d_x = 50.0;
  double d_z = 50.0;
  double forceps_length = 500.0;
  Point3 base{800.0, -400.0, -100.0};
  double wrist_yaw_offset = kPi;
  std::array<JointRange, 5> limits = default_joint_limits();

  /// Throws InvalidArgument when a length is not strictly positive or a range is empty.
  void validate() const;
};

struct ReducedConfig
{
  Vec3 q = Vec3::Zero();  // rad

  ReducedConfig() = default;
  explicit ReducedConfig(const Vec3& v) : q(v) {}
  ReducedConfig(double q1, double q2, double q3) : q(q1, q2, q3) {}

  double operator[](int i) const { return q[i]; }
};

struct JointConfig
{
  Vec5 q = Vec5::Zero();  // rad

  JointConfig() = default;
  explicit JointConfig(const Vec5& v) : q(v) {}

  ReducedConfig reduced() const { return ReducedConfig(q.head<3>()); }
  double operator[](int i) const { return q[i]; }
};

bool within_limits(const ArmGeometry& geom, const JointConfig& q);
bool within_limits(const ArmGeometry& geom, const ReducedConfig& q);
/// Throws LimitViolation naming the first offending joint.
void check_limits(const ArmGeometry& geom, const JointConfig& q);
void check_limits(const ArmGeometry& geom, const ReducedConfig& q);

struct TipPose
{
  Point3 tip;
  UnitVec3 shaft_dir;
};

TipPose forward_kinematics(const JointConfig& q, const ArmGeometry& geom);

/// Same chain without the limit check; used by oracles and derivative probes.
TipPose forward_kinematics_unchecked(const Vec5& q, const ArmGeometry& geom);

/// Position of the wrist pivot (joint 5), where the forceps shaft begins.
Point3 wrist_point(const Vec5& q, const ArmGeometry& geom);

struct WristAngles
{
  double q4 = 0.0;
  double q5 = 0.0;
};

/// Wrist angles (f(q), g(q)) putting the forceps shaft line through `port`.
WristAngles solve_rcm(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom);

/// Limit-free variant; still fails with NoSolution/NonConvergence.
WristAngles solve_rcm_unchecked(const Vec3& qr, const Point3& port, const ArmGeometry& geom);

/// Perpendicular distance from `port` to the forceps shaft line.
double rcm_residual(const JointConfig& q, const Point3& port, const ArmGeometry& geom);

JointConfig lift(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom);

/// Non-throwing lift for sampling loops.
std::optional<JointConfig> try_lift(const ReducedConfig& qr, const Point3& port,
                                    const ArmGeometry& geom);

JointConfig inverse_kinematics(const Point3& tip, const Point3& port, const ArmGeometry& geom);
std::optional<JointConfig> try_inverse_kinematics(const Point3& tip, const Point3& port,
                                                  const ArmGeometry& geom);
/// Branch closest to `reference`; nullopt if that branch violates a limit
/// (no jumping to another branch).
std::optional<JointConfig> try_inverse_kinematics_near(const Point3& tip, const Point3& port,
                                                       const ArmGeometry& geom,
                                                       const JointConfig& reference);

struct FgGradient
{
  Vec3 grad_f;
  Vec3 grad_g;
};

struct FgHessian
{
  Mat3 hess_f;
  Mat3 hess_g;
};

struct DerivativeOptions
{
  /// Compare implicit derivatives to central differences and throw
  /// DerivativeInconsistency beyond `tolerance` relative.
  bool cross_check = false;
  double fd_step = 1e-6;
  double tolerance = 1e-4;
};

FgGradient grad_fg(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom,
                   const DerivativeOptions& opts = {});
FgHessian hess_fg(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom,
                  const DerivativeOptions& opts = {});

/// Tip position as a function of the reduced configuration, with its
/// Jacobian and second derivatives (q4, q5 follow the port constraint).
struct TipJet
{
  Point3 x;
  Mat3 jacobian;                     // d x_k / d q_j
  std::array<Mat3, 3> second;        // second[k](i,j) = d2 x_k / dq_i dq_j
  FgGradient fg_gradient;
  FgHessian fg_hessian;
  WristAngles wrist;
};

TipJet tip_jet(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom);

}  // namespace rmplan
