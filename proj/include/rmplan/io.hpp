#pragma once

#include <string>

#include "rmplan/evaluation.hpp"
#include "rmplan/joint_obstacle_map.hpp"
#include "rmplan/roadmap_planner.hpp"

namespace rmplan {

/// Writes through a sibling temp file and rename; throws Error(Io).
void write_file_atomic(const std::string& path, const std::string& content);

/// Joint-space boundary as OBJ: vertices (q1, q2, q3) in degrees, 1-based faces.
std::string mesh_to_obj(const BoundaryMesh& mesh);

/// Patch labels, per-vertex curvature and skipped grid directions.
std::string mesh_sidecar_json(const BoundaryMesh& mesh);

/// Scene boundary samples as an OBJ point cloud (mm).
std::string samples_to_obj(const Scene& scene);

/// Columns t, q1..q5 (deg), x, y, z (mm), one row per curve sample.
/// Position-space curves are mapped to joints by continuous IK; rows
/// without an in-limit solution carry nan joints.
std::string trajectory_csv(const PlanResult& res, const Point3& port, const ArmGeometry& arm);

std::string roadmap_json(const Roadmap& rm);

/// Summary metrics plus run metadata.
std::string metrics_json(const MetricsReport& m, Space space, std::uint64_t seed, double sigma,
                         const std::vector<std::string>& warnings);

/// Per-sample arc length, insertion angle and its rate.
std::string trace_csv(const MetricsReport& m);

std::string comparison_json(const Comparison& cmp);

std::string calibration_json(const Calibration& cal, double sigma_x);

}  // namespace rmplan
