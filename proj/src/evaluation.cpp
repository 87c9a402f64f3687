#include "rmplan/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "rmplan/error.hpp"
#include "rmplan/kernels.hpp"

namespace rmplan {

double insertion_angle(const Point3& x, const Point3& p)
{
  const Vec3 d = x - p;
  if (d.norm() == 0.0) throw Error(ErrorCode::InvalidArgument, "tip coincides with the port");
  const double depth = -d.z();
  if (!(depth > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::atan(std::hypot(d.x(), d.y()) / depth);
}

double insertion_angle_rate(const Point3& x, const Point3& p, const Vec3& dir)
{
  const Vec3 d = x - p;
  const double depth = -d.z();
  if (!(depth > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double rho = std::hypot(d.x(), d.y());
  const double den = rho * rho + depth * depth;
  if (rho < 1e-12) return std::hypot(dir.x(), dir.y()) / depth;
  const Vec3 grad((depth / den) * d.x() / rho, (depth / den) * d.y() / rho, rho / den);
  return grad.dot(dir);
}

std::vector<double> arc_length(const PositionCurve& c)
{
  std::vector<double> s(c.t.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i)
    s[i] = s[i - 1] + 0.5 * (c.dx_dt[i - 1].norm() + c.dx_dt[i].norm()) * (c.t[i] - c.t[i - 1]);
  return s;
}

namespace {

struct Traces
{
  std::vector<double> s, psi, rate;
};

Traces traces(const PositionCurve& c, const Point3& p)
{
  Traces tr;
  tr.s = arc_length(c);
  tr.psi.resize(c.x.size());
  tr.rate.resize(c.x.size());
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    tr.psi[i] = insertion_angle(c.x[i], p);
    const double speed = c.dx_dt[i].norm();
    tr.rate[i] = speed > 0.0 ? insertion_angle_rate(c.x[i], p, c.dx_dt[i] / speed) : 0.0;
  }
  return tr;
}

// Trapezoidal mean of f over s, skipping intervals with a NaN end.
double arc_mean(const std::vector<double>& s, const std::vector<double>& f)
{
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (std::isnan(f[i - 1]) || std::isnan(f[i])) continue;
    const double ds = s[i] - s[i - 1];
    num += 0.5 * (f[i - 1] + f[i]) * ds;
    den += ds;
  }
  if (den > 0.0) return num / den;
  for (double v : f)
    if (!std::isnan(v)) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

double nan_max(const std::vector<double>& f, bool absolute)
{
  double m = -std::numeric_limits<double>::infinity();
  for (double v : f)
    if (!std::isnan(v)) m = std::max(m, absolute ? std::abs(v) : v);
  return m;
}

}  // namespace

AngleStats angle_stats(const PositionCurve& c, const Point3& p)
{
  if (c.x.empty()) throw Error(ErrorCode::DegenerateCurve, "empty curve");
  const auto tr = traces(c, p);
  return {arc_mean(tr.s, tr.psi), nan_max(tr.psi, false)};
}

AngleRateStats angle_derivative_stats(const PositionCurve& c, const Point3& p)
{
  if (c.x.empty()) throw Error(ErrorCode::DegenerateCurve, "empty curve");
  const auto tr = traces(c, p);
  std::vector<double> sq(tr.rate.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = tr.rate[i] * tr.rate[i];
  const double ms = arc_mean(tr.s, sq);
  return {std::sqrt(ms), nan_max(tr.rate, true)};
}

MetricsReport evaluate_curve(const PositionCurve& c, const Point3& p)
{
  if (c.x.empty()) throw Error(ErrorCode::DegenerateCurve, "empty curve");
  const auto tr = traces(c, p);
  MetricsReport r;
  r.s = tr.s;
  r.path_length_mm = tr.s.back();
  for (std::size_t i = 0; i < tr.psi.size(); ++i) {
    if (std::isnan(tr.psi[i])) ++r.excluded_samples;
    r.psi_deg.push_back(rad2deg(tr.psi[i]));
    r.dpsi_deg_per_mm.push_back(rad2deg(tr.rate[i]));
  }
  if (r.excluded_samples > 0)
    r.warnings.push_back(std::to_string(r.excluded_samples) +
                         " sample(s) at or above the port plane excluded from angle statistics");
  const auto a = angle_stats(c, p);
  const auto d = angle_derivative_stats(c, p);
  r.psi_ave_deg = rad2deg(a.psi_ave);
  r.psi_max_deg = rad2deg(a.psi_max);
  r.dpsi_rms_deg_per_mm = rad2deg(d.rms);
  r.dpsi_max_deg_per_mm = rad2deg(d.max);
  return r;
}

Calibration calibrate_sigma_q(const PositionMesh& mesh, const ArmGeometry& arm, const Point3& port,
                              double sigma_x, bool parallel)
{
  if (!(sigma_x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_x must be >= 0");
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyMesh, "position mesh has no triangles");
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  const auto one = [&](std::size_t t) {
    const auto& tri = mesh.triangles[t];
    const Point3 c = (mesh.vertices[static_cast<std::size_t>(tri[0])] +
                      mesh.vertices[static_cast<std::size_t>(tri[1])] +
                      mesh.vertices[static_cast<std::size_t>(tri[2])]) / 3.0;
    const Vec3 off = 0.5 * sigma_x * mesh.normals[t];
    // Solve at the centroid first so both sides land on the same branch.
    const auto q0 = try_inverse_kinematics(c, port, arm);
    if (!q0) return nan;
    const auto qp = try_inverse_kinematics_near(c + off, port, arm, *q0);
    const auto qm = try_inverse_kinematics_near(c - off, port, arm, *q0);
    if (!qp || !qm) return nan;
    return (qp->q - qm->q).norm();
  };
  const auto vals = parallel ? kernels::map_parallel(mesh.triangles.size(), one)
                             : kernels::map_serial(mesh.triangles.size(), one);
  Calibration cal;
  double sum = 0.0;
  for (double v : vals) {
    if (std::isnan(v)) {
      ++cal.skipped;
      continue;
    }
    ++cal.used;
    sum += v;
  }
  if (cal.used == 0) throw Error(ErrorCode::CalibrationFailed, "IK failed at every triangle");
  cal.sigma_q = sum / static_cast<double>(cal.used);
  return cal;
}

namespace {

ComparisonSummary summarise(const std::vector<ComparisonRow>& rows, Space space)
{
  ComparisonSummary s;
  s.space = space;
  std::vector<std::array<double, 5>> vals;
  for (const auto& r : rows) {
    if (r.space != space || !r.ok) continue;
    const auto& m = r.metrics;
    vals.push_back({m.psi_ave_deg, m.psi_max_deg, m.dpsi_rms_deg_per_mm, m.dpsi_max_deg_per_mm,
                    m.path_length_mm});
  }
  s.runs = vals.size();
  if (vals.empty()) return s;
  const double n = static_cast<double>(vals.size());
  for (int k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (const auto& v : vals) sum += v[static_cast<std::size_t>(k)];
    s.mean[k] = sum / n;
    double ss = 0.0;
    for (const auto& v : vals) ss += std::pow(v[static_cast<std::size_t>(k)] - s.mean[k], 2);
    s.spread[k] = vals.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  double len = 0.0;
  for (const auto& v : vals) len += v[4];
  s.mean_length_mm = len / n;
  return s;
}

}  // namespace

Comparison compare(const Scene& scene, const ArmGeometry& arm, const BoundaryMesh& mesh,
                   const Point3& start, const Point3& goal, const PlannerParams& params,
                   const std::vector<std::uint64_t>& seeds)
{
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "compare needs at least one seed");
  Comparison cmp;
  cmp.sigma_q = params.sigma_q;
  cmp.sigma_x = params.sigma_x;
  for (const auto seed : seeds) {
    for (const Space space : {Space::Joint, Space::Position}) {
      ComparisonRow row;
      row.seed = seed;
      row.space = space;
      try {
        const auto plan = space == Space::Joint
                              ? plan_joint_space(scene, arm, mesh, start, goal, params, seed)
                              : plan_position_space(scene, start, goal, params, seed);
        row.metrics = evaluate_curve(plan.curve, scene.port());
        for (const auto& w : plan.warnings) row.metrics.warnings.push_back(w);
        row.ok = true;
      } catch (const Error& e) {
        row.error = e.what();
      }
      cmp.rows.push_back(std::move(row));
    }
  }
  cmp.joint = summarise(cmp.rows, Space::Joint);
  cmp.position = summarise(cmp.rows, Space::Position);
  return cmp;
}

std::string format_comparison(const Comparison& cmp)
{
  std::ostringstream out;
  out << std::fixed;
  out << "sigma_x = " << std::setprecision(3) << cmp.sigma_x << " mm, sigma_q = "
      << rad2deg(cmp.sigma_q) << " deg\n\n";
  out << std::left << std::setw(10) << "planner" << std::setw(8) << "seed" << std::right
      << std::setw(12) << "psi_ave" << std::setw(12) << "psi_max" << std::setw(14) << "dpsi_rms"
      << std::setw(14) << "dpsi_max" << std::setw(12) << "length" << "\n";
  out << std::left << std::setw(18) << "" << std::right << std::setw(12) << "[deg]" << std::setw(12)
      << "[deg]" << std::setw(14) << "[deg/mm]" << std::setw(14) << "[deg/mm]" << std::setw(12)
      << "[mm]" << "\n";
  for (const auto& r : cmp.rows) {
    out << std::left << std::setw(10) << to_string(r.space) << std::setw(8) << r.seed << std::right;
    if (!r.ok) {
      out << "  failed: " << r.error << "\n";
      continue;
    }
    const auto& m = r.metrics;
    out << std::setprecision(2) << std::setw(12) << m.psi_ave_deg << std::setw(12) << m.psi_max_deg
        << std::setprecision(4) << std::setw(14) << m.dpsi_rms_deg_per_mm << std::setw(14)
        << m.dpsi_max_deg_per_mm << std::setprecision(1) << std::setw(12) << m.path_length_mm << "\n";
  }
  out << "\n";
  for (const auto* s : {&cmp.joint, &cmp.position}) {
    out << std::left << std::setw(10) << to_string(s->space) << std::setw(8) << "mean" << std::right
        << std::setprecision(2) << std::setw(12) << s->mean[0] << std::setw(12) << s->mean[1]
        << std::setprecision(4) << std::setw(14) << s->mean[2] << std::setw(14) << s->mean[3]
        << std::setprecision(1) << std::setw(12) << s->mean_length_mm << "\n";
    out << std::left << std::setw(10) << "" << std::setw(8) << "sd" << std::right
        << std::setprecision(2) << std::setw(12) << s->spread[0] << std::setw(12) << s->spread[1]
        << std::setprecision(4) << std::setw(14) << s->spread[2] << std::setw(14) << s->spread[3]
        << std::setw(12) << "" << "\n";
  }
  return out.str();
}

}  // namespace rmplan
