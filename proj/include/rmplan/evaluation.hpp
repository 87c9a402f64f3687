#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmplan/roadmap_planner.hpp"

namespace rmplan {

/// Angle between the port-to-tip direction and the downward vertical, in
/// [0, pi/2). NaN for tips at or above the port plane. Throws at x = p.
double insertion_angle(const Point3& x, const Point3& p);

/// d psi / d s along the unit tangent `dir` at x (rad per mm).
double insertion_angle_rate(const Point3& x, const Point3& p, const Vec3& dir);

struct AngleStats
{
  double psi_ave = 0.0;  // rad
  double psi_max = 0.0;  // rad
};

struct AngleRateStats
{
  double rms = 0.0;  // rad / mm
  double max = 0.0;  // rad / mm
};

struct MetricsReport
{
  double psi_ave_deg = 0.0;
  double psi_max_deg = 0.0;
  double dpsi_rms_deg_per_mm = 0.0;
  double dpsi_max_deg_per_mm = 0.0;
  double path_length_mm = 0.0;
  std::size_t excluded_samples = 0;
  std::vector<std::string> warnings;
  // per-sample traces
  std::vector<double> s;
  std::vector<double> psi_deg;
  std::vector<double> dpsi_deg_per_mm;
};

/// Cumulative arc length of the sampled curve (trapezoidal in |dx/dt|).
std::vector<double> arc_length(const PositionCurve& c);

AngleStats angle_stats(const PositionCurve& c, const Point3& p);
AngleRateStats angle_derivative_stats(const PositionCurve& c, const Point3& p);

/// Full report; a zero-length curve yields zeros (psi from its single point).
MetricsReport evaluate_curve(const PositionCurve& c, const Point3& p);

struct Calibration
{
  double sigma_q = 0.0;  // rad
  std::size_t used = 0;
  std::size_t skipped = 0;
};

/// Mean joint-space displacement between IK solutions at triangle centroids
/// pushed +/- sigma_x/2 along the free-space normal.
Calibration calibrate_sigma_q(const PositionMesh& mesh, const ArmGeometry& arm, const Point3& port,
                              double sigma_x, bool parallel = true);

struct ComparisonRow
{
  std::uint64_t seed = 0;
  Space space = Space::Joint;
  bool ok = false;
  std::string error;
  MetricsReport metrics;
};

struct ComparisonSummary
{
  Space space = Space::Joint;
  std::size_t runs = 0;
  double mean[4] = {0, 0, 0, 0};    // psi_ave, psi_max, dpsi_rms, dpsi_max
  double spread[4] = {0, 0, 0, 0};  // sample standard deviation
  double mean_length_mm = 0.0;
};

struct Comparison
{
  std::vector<ComparisonRow> rows;
  ComparisonSummary joint;
  ComparisonSummary position;
  double sigma_q = 0.0;
  double sigma_x = 0.0;
};

Comparison compare(const Scene& scene, const ArmGeometry& arm, const BoundaryMesh& mesh,
                   const Point3& start, const Point3& goal, const PlannerParams& params,
                   const std::vector<std::uint64_t>& seeds);

/// Aligned plain-text table of a comparison.
std::string format_comparison(const Comparison& cmp);

}  // namespace rmplan
