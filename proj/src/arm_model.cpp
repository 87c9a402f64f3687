#include "rmplan/arm_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "rmplan/error.hpp"
#include "rmplan/jet.hpp"

namespace rmplan {

namespace {

constexpr int kNewtonMaxIter = 50;
constexpr double kNewtonDamping = 0.5;
constexpr double kResidualTarget = 1e-11;
constexpr double kResidualAccept = 1e-9;

template <class T>
struct ChainPoints
{
  std::array<T, 3> j5;
  std::array<T, 3> u;
};

// Joint-5 position and forceps direction. Works for double and Jet2.
template <class T>
ChainPoints<T> chain(const std::array<T, 5>& z, const ArmGeometry& g)
{
  using std::cos;
  using std::sin;
  const T c1 = cos(z[0]), s1 = sin(z[0]);
  const T rho = g.l2 * cos(z[1]) + g.l3 * cos(z[2]);
  const T h = g.l2 * sin(z[1]) + g.l3 * sin(z[2]);
  const T yaw = z[0] + g.wrist_yaw_offset + z[3];
  const T cy = cos(yaw), sy = sin(yaw);
  const T c5 = cos(z[4]), s5 = sin(z[4]);
  ChainPoints<T> out;
  out.j5[0] = g.base.x() + rho * c1 + g.d_x * cy;
  out.j5[1] = g.base.y() + rho * s1 + g.d_x * sy;
  out.j5[2] = g.base.z() + h - g.d_z;
  out.u[0] = c5 * cy;
  out.u[1] = c5 * sy;
  out.u[2] = -s5;
  return out;
}

// Port-on-shaft residual: components of (port - j5) orthogonal to the shaft,
// expressed in the orthonormal frame {horizontal normal, d u / d q5}.
template <class T>
std::array<T, 2> rcm_residual_t(const std::array<T, 5>& z, const Point3& port, const ArmGeometry& g)
{
  using std::cos;
  using std::sin;
  const auto c = chain(z, g);
  const T yaw = z[0] + g.wrist_yaw_offset + z[3];
  const T cy = cos(yaw), sy = sin(yaw);
  const T c5 = cos(z[4]), s5 = sin(z[4]);
  const T vx = port.x() - c.j5[0];
  const T vy = port.y() - c.j5[1];
  const T vz = port.z() - c.j5[2];
  std::array<T, 2> r;
  r[0] = -sy * vx + cy * vy;
  r[1] = -s5 * cy * vx - s5 * sy * vy - c5 * vz;
  return r;
}

template <class T>
std::array<T, 3> tip_t(const std::array<T, 5>& z, const ArmGeometry& g)
{
  const auto c = chain(z, g);
  std::array<T, 3> x;
  for (int k = 0; k < 3; ++k) x[k] = c.j5[k] + g.forceps_length * c.u[k];
  return x;
}

std::array<double, 5> pack(const Vec3& q, double q4, double q5)
{
  return {q[0], q[1], q[2], q4, q5};
}

Point3 elbow_end(const Vec3& q, const ArmGeometry& g)
{
  const double rho = g.l2 * std::cos(q[1]) + g.l3 * std::cos(q[2]);
  const double h = g.l2 * std::sin(q[1]) + g.l3 * std::sin(q[2]);
  return g.base + Point3(rho * std::cos(q[0]), rho * std::sin(q[0]), h);
}

double residual_norm(const Vec3& q, double q4, double q5, const Point3& port, const ArmGeometry& g)
{
  const auto r = rcm_residual_t<double>(pack(q, q4, q5), port, g);
  return std::hypot(r[0], r[1]);
}

double shaft_parameter(const Vec3& q, double q4, double q5, const Point3& port, const ArmGeometry& g)
{
  const auto c = chain<double>(pack(q, q4, q5), g);
  return (port.x() - c.j5[0]) * c.u[0] + (port.y() - c.j5[1]) * c.u[1] +
         (port.z() - c.j5[2]) * c.u[2];
}

// Damped Newton on the 2x2 wrist system. Returns nullopt when the iteration
// cap is hit without reaching the acceptance residual.
std::optional<WristAngles> newton_polish(const Vec3& q, WristAngles w, const Point3& port,
                                         const ArmGeometry& g)
{
  using J = Jet2<2>;
  double rn = residual_norm(q, w.q4, w.q5, port, g);
  for (int it = 0; it < kNewtonMaxIter && rn > kResidualTarget; ++it) {
    const std::array<J, 5> z{J(q[0]), J(q[1]), J(q[2]), J::variable(w.q4, 0), J::variable(w.q5, 1)};
    const auto r = rcm_residual_t<J>(z, port, g);
    Eigen::Matrix2d a;
    a << r[0].g[0], r[0].g[1], r[1].g[0], r[1].g[1];
    const Eigen::Vector2d rv(r[0].v, r[1].v);
    if (std::abs(a.determinant()) < 1e-14) return std::nullopt;
    const Eigen::Vector2d step = -(a.inverse() * rv);
    double scale = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k) {
      const WristAngles trial{w.q4 + scale * step[0], w.q5 + scale * step[1]};
      const double tn = residual_norm(q, trial.q4, trial.q5, port, g);
      if (tn < rn) {
        w = trial;
        rn = tn;
        improved = true;
        break;
      }
      scale *= kNewtonDamping;
    }
    if (!improved) break;
  }
  if (rn > kResidualAccept) return std::nullopt;
  return w;
}

// Closed-form wrist solutions exist because the joint-5 offset lies along the
// wrist heading; both branches are polished by Newton before use.
std::vector<WristAngles> rcm_candidates(const Vec3& q, const Point3& port, const ArmGeometry& g,
                                        bool& any_converged)
{
  any_converged = false;
  const Point3 c = port - elbow_end(q, g) + Point3(0.0, 0.0, g.d_z);
  const double ch = std::hypot(c.x(), c.y());
  std::vector<WristAngles> seeds;
  if (ch > 1e-12) {
    const double yaw = std::atan2(c.y(), c.x());
    seeds.push_back({wrap_angle(yaw - q[0] - g.wrist_yaw_offset), std::atan2(-c.z(), ch - g.d_x)});
    seeds.push_back(
        {wrap_angle(yaw + kPi - q[0] - g.wrist_yaw_offset), std::atan2(-c.z(), -ch - g.d_x)});
  } else {
    // Port straight below the elbow end: any heading works, pick q4 = 0.
    seeds.push_back({0.0, std::atan2(-c.z(), -g.d_x)});
  }
  std::vector<WristAngles> out;
  for (const auto& s : seeds) {
    auto w = newton_polish(q, s, port, g);
    if (!w) continue;
    any_converged = true;
    w->q4 = wrap_angle(w->q4);
    if (shaft_parameter(q, w->q4, w->q5, port, g) > 0.0) out.push_back(*w);
  }
  return out;
}

bool wrist_in_limits(const ArmGeometry& g, const WristAngles& w)
{
  return g.limits[3].contains(w.q4) && g.limits[4].contains(w.q5);
}

const WristAngles* pick_wrist(const std::vector<WristAngles>& c, const ArmGeometry& g)
{
  const WristAngles* best = nullptr;
  for (const auto& w : c) {
    if (!wrist_in_limits(g, w)) continue;
    if (!best || std::hypot(w.q4, w.q5) < std::hypot(best->q4, best->q5)) best = &w;
  }
  return best;
}

}  // namespace

std::array<JointRange, 5> default_joint_limits()
{
  return {JointRange{deg2rad(-150.0), deg2rad(150.0)}, JointRange{deg2rad(0.0), deg2rad(90.0)},
          JointRange{deg2rad(-90.0), deg2rad(0.0)}, JointRange{deg2rad(-90.0), deg2rad(90.0)},
          JointRange{deg2rad(-14.0), deg2rad(104.0)}};
}

void ArmGeometry::validate() const
{
  if (!(l2 > 0.0) || !(l3 > 0.0) || !(d_x > 0.0) || !(d_z > 0.0) || !(forceps_length > 0.0))
    throw Error(ErrorCode::InvalidArgument, "arm lengths must be strictly positive");
  for (int i = 0; i < 5; ++i)
    if (!(limits[i].min <= limits[i].max))
      throw Error(ErrorCode::InvalidArgument, "empty range for joint " + std::to_string(i + 1));
}

bool within_limits(const ArmGeometry& geom, const JointConfig& q)
{
  for (int i = 0; i < 5; ++i)
    if (!geom.limits[i].contains(q.q[i])) return false;
  return true;
}

bool within_limits(const ArmGeometry& geom, const ReducedConfig& q)
{
  for (int i = 0; i < 3; ++i)
    if (!geom.limits[i].contains(q.q[i])) return false;
  return true;
}

void check_limits(const ArmGeometry& geom, const JointConfig& q)
{
  for (int i = 0; i < 5; ++i)
    if (!geom.limits[i].contains(q.q[i]))
      throw Error(ErrorCode::LimitViolation, "q" + std::to_string(i + 1) + " = " +
                                                 std::to_string(rad2deg(q.q[i])) + " deg");
}

void check_limits(const ArmGeometry& geom, const ReducedConfig& q)
{
  for (int i = 0; i < 3; ++i)
    if (!geom.limits[i].contains(q.q[i]))
      throw Error(ErrorCode::LimitViolation, "q" + std::to_string(i + 1) + " = " +
                                                 std::to_string(rad2deg(q.q[i])) + " deg");
}

TipPose forward_kinematics_unchecked(const Vec5& q, const ArmGeometry& geom)
{
  const std::array<double, 5> z{q[0], q[1], q[2], q[3], q[4]};
  const auto c = chain<double>(z, geom);
  const Vec3 u(c.u[0], c.u[1], c.u[2]);
  const Point3 j5(c.j5[0], c.j5[1], c.j5[2]);
  return {j5 + geom.forceps_length * u, UnitVec3(u)};
}

TipPose forward_kinematics(const JointConfig& q, const ArmGeometry& geom)
{
  check_limits(geom, q);
  return forward_kinematics_unchecked(q.q, geom);
}

Point3 wrist_point(const Vec5& q, const ArmGeometry& geom)
{
  const auto c = chain<double>({q[0], q[1], q[2], q[3], q[4]}, geom);
  return {c.j5[0], c.j5[1], c.j5[2]};
}

double rcm_residual(const JointConfig& q, const Point3& port, const ArmGeometry& geom)
{
  return residual_norm(q.q.head<3>(), q.q[3], q.q[4], port, geom);
}

WristAngles solve_rcm_unchecked(const Vec3& qr, const Point3& port, const ArmGeometry& geom)
{
  bool converged = false;
  const auto cands = rcm_candidates(qr, port, geom, converged);
  if (cands.empty()) {
    if (!converged) throw Error(ErrorCode::NonConvergence, "wrist Newton iteration cap reached");
    throw Error(ErrorCode::NoSolution, "port lies behind the wrist for this arm pose");
  }
  if (const auto* w = pick_wrist(cands, geom)) return *w;
  return cands.front();
}

WristAngles solve_rcm(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom)
{
  check_limits(geom, qr);
  bool converged = false;
  const auto cands = rcm_candidates(qr.q, port, geom, converged);
  if (cands.empty()) {
    if (!converged) throw Error(ErrorCode::NonConvergence, "wrist Newton iteration cap reached");
    throw Error(ErrorCode::NoSolution, "port lies behind the wrist for this arm pose");
  }
  if (const auto* w = pick_wrist(cands, geom)) return *w;
  throw Error(ErrorCode::LimitViolation, "wrist solution outside q4/q5 range");
}

JointConfig lift(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom)
{
  const auto w = solve_rcm(qr, port, geom);
  Vec5 q;
  q << qr.q, w.q4, w.q5;
  return JointConfig(q);
}

std::optional<JointConfig> try_lift(const ReducedConfig& qr, const Point3& port,
                                    const ArmGeometry& geom)
{
  if (!within_limits(geom, qr)) return std::nullopt;
  bool converged = false;
  const auto cands = rcm_candidates(qr.q, port, geom, converged);
  const auto* w = pick_wrist(cands, geom);
  if (!w) return std::nullopt;
  Vec5 q;
  q << qr.q, w->q4, w->q5;
  return JointConfig(q);
}

namespace {

enum class IkStatus { Ok, NoSolution, LimitViolation };

// Without `ref`: the in-limit branch of smallest norm. With `ref`: the branch
// closest to it, rejected if that branch is out of limits.
IkStatus ik_impl(const Point3& tip, const Point3& port, const ArmGeometry& g, JointConfig& out,
                 const Vec5* ref = nullptr)
{
  const Vec3 d = tip - port;
  const double depth = d.norm();
  if (depth < 1e-9) return IkStatus::NoSolution;
  const Vec3 u = d / depth;
  const Point3 j5 = tip - g.forceps_length * u;
  const double uh = std::hypot(u.x(), u.y());

  struct WristBranch
  {
    double yaw, q5;
  };
  std::vector<WristBranch> wrists;
  if (uh > 1e-12) {
    const double yaw = std::atan2(u.y(), u.x());
    const double q5 = std::atan2(-u.z(), uh);
    wrists.push_back({yaw, q5});
    wrists.push_back({yaw + kPi, kPi - q5});
  } else {
    // Vertical shaft: heading is free, take the arm-plane heading later.
    wrists.push_back({std::nan(""), std::atan2(-u.z(), 0.0)});
  }

  bool any_real = false;
  bool have = false;
  double best_norm = 0.0;
  for (const auto& wb : wrists) {
    auto arm_branches = [&](double yaw) {
      const Point3 j4 = j5 - Point3(g.d_x * std::cos(yaw), g.d_x * std::sin(yaw), -g.d_z);
      const Vec3 rel = j4 - g.base;
      const double rho = std::hypot(rel.x(), rel.y());
      const double h = rel.z();
      const double q1 = std::atan2(rel.y(), rel.x());
      const double dd = rho * rho + h * h;
      const double c = (dd - g.l2 * g.l2 - g.l3 * g.l3) / (2.0 * g.l2 * g.l3);
      if (std::abs(c) > 1.0 + 1e-12 || rho < 1e-12) return;
      const double el0 = std::acos(std::clamp(c, -1.0, 1.0));
      for (const double el : {el0, -el0}) {
        any_real = true;
        const double q2 = std::atan2(h, rho) - std::atan2(g.l3 * std::sin(-el), g.l2 + g.l3 * std::cos(el));
        const double q3 = q2 - el;
        Vec5 q;
        q << q1, q2, q3, wrap_angle(yaw - q1 - g.wrist_yaw_offset), wb.q5;
        JointConfig jc(q);
        if (ref) {
          // Limits are checked after the pick so the chart never jumps branches.
          const double n = (q - *ref).norm();
          if (!have || n < best_norm) {
            have = true;
            best_norm = n;
            out = jc;
          }
          continue;
        }
        if (!within_limits(g, jc)) continue;
        const double n = q.norm();
        if (!have || n < best_norm) {
          have = true;
          best_norm = n;
          out = jc;
        }
      }
    };
    if (std::isnan(wb.yaw)) {
      // Heading follows the arm plane; iterate once so j4 is consistent.
      const Vec3 rel = j5 + Point3(0.0, 0.0, g.d_z) - g.base;
      double yaw = std::atan2(rel.y(), rel.x()) + g.wrist_yaw_offset;
      for (int k = 0; k < 20; ++k) {
        const Point3 j4 = j5 - Point3(g.d_x * std::cos(yaw), g.d_x * std::sin(yaw), -g.d_z);
        yaw = std::atan2(j4.y() - g.base.y(), j4.x() - g.base.x()) + g.wrist_yaw_offset;
      }
      arm_branches(yaw);
    } else {
      arm_branches(wb.yaw);
    }
  }
  if (have && (!ref || within_limits(g, out))) return IkStatus::Ok;
  return any_real ? IkStatus::LimitViolation : IkStatus::NoSolution;
}

}  // namespace

JointConfig inverse_kinematics(const Point3& tip, const Point3& port, const ArmGeometry& geom)
{
  JointConfig out;
  switch (ik_impl(tip, port, geom, out)) {
    case IkStatus::Ok: break;
    case IkStatus::NoSolution:
      throw Error(ErrorCode::NoSolution, "tip out of reach with the shaft through the port");
    case IkStatus::LimitViolation:
      throw Error(ErrorCode::LimitViolation, "every inverse-kinematics branch violates a joint limit");
  }
  const auto fk = forward_kinematics_unchecked(out.q, geom);
  if ((fk.tip - tip).norm() > 1e-6 || rcm_residual(out, port, geom) > 1e-6)
    throw Error(ErrorCode::NonConvergence, "inverse kinematics failed its forward check");
  return out;
}

std::optional<JointConfig> try_inverse_kinematics(const Point3& tip, const Point3& port,
                                                  const ArmGeometry& geom)
{
  JointConfig out;
  if (ik_impl(tip, port, geom, out) != IkStatus::Ok) return std::nullopt;
  return out;
}

std::optional<JointConfig> try_inverse_kinematics_near(const Point3& tip, const Point3& port,
                                                       const ArmGeometry& geom,
                                                       const JointConfig& reference)
{
  JointConfig out;
  if (ik_impl(tip, port, geom, out, &reference.q) != IkStatus::Ok) return std::nullopt;
  return out;
}

// ---------------------------------------------------------------------------
// Derivatives of the implicit wrist functions.

namespace {

using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat53 = Eigen::Matrix<double, 5, 3>;

struct ImplicitDerivs
{
  WristAngles w;
  Mat23 grad;                    // rows: grad f, grad g
  std::array<Mat3, 2> hess;      // hess f, hess g
  Mat53 z_q;                     // d(q1..q5)/d(q1..q3)
};

std::array<Jet2<5>, 5> seeded(const Vec3& q, const WristAngles& w)
{
  using J = Jet2<5>;
  return {J::variable(q[0], 0), J::variable(q[1], 1), J::variable(q[2], 2), J::variable(w.q4, 3),
          J::variable(w.q5, 4)};
}

Eigen::Matrix<double, 5, 5> hess_of(const Jet2<5>& j)
{
  Eigen::Matrix<double, 5, 5> h;
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 5; ++k) h(i, k) = j.h[i][k];
  return 0.5 * (h + h.transpose());
}

Mat23 fd_gradient(const Vec3& q, const WristAngles& w0, const Point3& port, const ArmGeometry& g,
                  double step)
{
  Mat23 out;
  for (int j = 0; j < 3; ++j) {
    Vec3 qp = q, qm = q;
    qp[j] += step;
    qm[j] -= step;
    const auto wp = newton_polish(qp, w0, port, g);
    const auto wm = newton_polish(qm, w0, port, g);
    if (!wp || !wm) throw Error(ErrorCode::NoSolution, "wrist solution lost under perturbation");
    out(0, j) = wrap_angle(wp->q4 - wm->q4) / (2.0 * step);
    out(1, j) = (wp->q5 - wm->q5) / (2.0 * step);
  }
  return out;
}

ImplicitDerivs implicit_derivs(const Vec3& q, const WristAngles& w, const Point3& port,
                               const ArmGeometry& g, bool want_hessian, double fd_step)
{
  ImplicitDerivs d;
  d.w = w;
  const auto r = rcm_residual_t<Jet2<5>>(seeded(q, w), port, g);
  Eigen::Matrix2d a;
  Mat23 b;
  for (int k = 0; k < 2; ++k) {
    a(k, 0) = r[k].g[3];
    a(k, 1) = r[k].g[4];
    for (int j = 0; j < 3; ++j) b(k, j) = r[k].g[j];
  }
  const bool singular = std::abs(a.determinant()) < 1e-10 * (1.0 + a.squaredNorm());
  if (singular) {
    d.grad = fd_gradient(q, w, port, g, fd_step);
  } else {
    d.grad = -a.lu().solve(b);
  }
  d.z_q.setZero();
  d.z_q.topRows<3>().setIdentity();
  d.z_q.bottomRows<2>() = d.grad;
  if (want_hessian) {
    if (singular) {
      for (int j = 0; j < 3; ++j) {
        Vec3 qp = q, qm = q;
        qp[j] += fd_step;
        qm[j] -= fd_step;
        const Mat23 gp = fd_gradient(qp, w, port, g, fd_step);
        const Mat23 gm = fd_gradient(qm, w, port, g, fd_step);
        for (int m = 0; m < 2; ++m) d.hess[m].col(j) = (gp.row(m) - gm.row(m)).transpose() / (2.0 * fd_step);
      }
      for (auto& h : d.hess) h = 0.5 * (h + h.transpose()).eval();
    } else {
      Eigen::Matrix<double, 2, 9> rhs;
      for (int k = 0; k < 2; ++k) {
        const Mat3 m = d.z_q.transpose() * hess_of(r[k]) * d.z_q;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) rhs(k, 3 * i + j) = m(i, j);
      }
      const Eigen::Matrix<double, 2, 9> wqq = -a.lu().solve(rhs);
      for (int m = 0; m < 2; ++m)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) d.hess[m](i, j) = wqq(m, 3 * i + j);
      for (auto& h : d.hess) h = 0.5 * (h + h.transpose()).eval();
    }
  }
  return d;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

FgGradient grad_fg(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom,
                   const DerivativeOptions& opts)
{
  const auto w = solve_rcm(qr, port, geom);
  const auto d = implicit_derivs(qr.q, w, port, geom, false, opts.fd_step);
  if (opts.cross_check) {
    const Mat23 fd = fd_gradient(qr.q, w, port, geom, opts.fd_step);
    if (rel_err(d.grad, fd) > opts.tolerance)
      throw Error(ErrorCode::DerivativeInconsistency, "implicit gradient disagrees with differences");
  }
  return {d.grad.row(0).transpose(), d.grad.row(1).transpose()};
}

FgHessian hess_fg(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom,
                  const DerivativeOptions& opts)
{
  const auto w = solve_rcm(qr, port, geom);
  const auto d = implicit_derivs(qr.q, w, port, geom, true, opts.fd_step);
  if (opts.cross_check) {
    for (int j = 0; j < 3; ++j) {
      Vec3 qp = qr.q, qm = qr.q;
      qp[j] += opts.fd_step;
      qm[j] -= opts.fd_step;
      const auto wp = newton_polish(qp, w, port, geom);
      const auto wm = newton_polish(qm, w, port, geom);
      if (!wp || !wm) throw Error(ErrorCode::NoSolution, "wrist solution lost under perturbation");
      const auto dp = implicit_derivs(qp, *wp, port, geom, false, opts.fd_step);
      const auto dm = implicit_derivs(qm, *wm, port, geom, false, opts.fd_step);
      const Mat23 col = (dp.grad - dm.grad) / (2.0 * opts.fd_step);
      for (int m = 0; m < 2; ++m) {
        const Vec3 ana = d.hess[m].col(j);
        const Vec3 num = col.row(m).transpose();
        if ((ana - num).norm() > opts.tolerance * std::max(1.0, num.norm()))
          throw Error(ErrorCode::DerivativeInconsistency, "implicit Hessian disagrees with differences");
      }
    }
  }
  return {d.hess[0], d.hess[1]};
}

TipJet tip_jet(const ReducedConfig& qr, const Point3& port, const ArmGeometry& geom)
{
  const auto w = solve_rcm_unchecked(qr.q, port, geom);
  const auto d = implicit_derivs(qr.q, w, port, geom, true, 1e-6);
  const auto x = tip_t<Jet2<5>>(seeded(qr.q, w), geom);
  TipJet out;
  out.wrist = w;
  out.fg_gradient = {d.grad.row(0).transpose(), d.grad.row(1).transpose()};
  out.fg_hessian = {d.hess[0], d.hess[1]};
  for (int k = 0; k < 3; ++k) {
    out.x[k] = x[k].v;
    Eigen::Matrix<double, 1, 5> gz;
    for (int i = 0; i < 5; ++i) gz[i] = x[k].g[i];
    out.jacobian.row(k) = gz * d.z_q;
    out.second[k] = d.z_q.transpose() * hess_of(x[k]) * d.z_q + gz[3] * d.hess[0] + gz[4] * d.hess[1];
  }
  return out;
}

}  // namespace rmplan
