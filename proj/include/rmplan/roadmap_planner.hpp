#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmplan/arm_model.hpp"
#include "rmplan/joint_obstacle_map.hpp"
#include "rmplan/riemannian_metric.hpp"
#include "rmplan/scene.hpp"
#include "rmplan/spline.hpp"

namespace rmplan {

struct Roadmap
{
  Space space = Space::Joint;
  std::vector<Vec3> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> costs;  // per edge, may be +inf
  int start = 0;
  int goal = 1;

  /// Throws InvalidArgument on self-loops, bad indices or negative costs.
  void validate() const;
};

std::vector<int> dijkstra(const Roadmap& roadmap, int src, int dst);

/// Axis-aligned sampling box in reduced joint coordinates.
struct JointBox
{
  Vec3 lo;
  Vec3 hi;
};

/// Box around the joint-space free region: the boundary mesh vertices and the
/// images of points just below the port, clipped to the joint limits.
JointBox joint_sampling_box(const Scene& scene, const ArmGeometry& arm, const BoundaryMesh& mesh);

/// Joint configuration whose lifted tip is reachable and free.
bool joint_config_free(const ReducedConfig& q, const Scene& scene, const ArmGeometry& arm);

/// Nodes 0 and 1 are `start` and `goal`; the rest are seeded uniform draws
/// that pass the free test. Throws RejectionBudgetExceeded after 1000 n draws.
std::vector<Vec3> sample_free_position(int n, const Scene& scene, const Point3& start,
                                       const Point3& goal, std::uint64_t seed);
std::vector<Vec3> sample_free_joint(int n, const Scene& scene, const ArmGeometry& arm,
                                    const JointBox& box, const Vec3& start, const Vec3& goal,
                                    std::uint64_t seed);

/// Delaunay edges of the nodes (complete graph below 4 nodes); costs unset.
Roadmap build_roadmap(Space space, const std::vector<Vec3>& nodes);

/// True if the tip stays free along the straight joint-space edge.
bool joint_edge_free(const Vec3& qa, const Vec3& qb, const Scene& scene, const ArmGeometry& arm,
                     double max_step_mm = 2.0);
bool position_edge_free(const Vec3& xa, const Vec3& xb, const Scene& scene);

/// Edge costs in roadmap order; +inf for colliding edges.
std::vector<double> joint_edge_costs_serial(const Roadmap& rm, const RiemannianMetric& metric,
                                            const Scene& scene, const ArmGeometry& arm);
std::vector<double> joint_edge_costs_parallel(const Roadmap& rm, const RiemannianMetric& metric,
                                              const Scene& scene, const ArmGeometry& arm);
std::vector<double> position_edge_costs_serial(const Roadmap& rm, const Scene& scene, double sigma_x);
std::vector<double> position_edge_costs_parallel(const Roadmap& rm, const Scene& scene, double sigma_x);

struct PlannerParams
{
  int n_samples = 1000;
  double sigma_x = 5.0;      // mm
  double sigma_q = 0.0;      // rad
  int samples_per_segment = 1000;
  bool parallel = true;
};

/// Densely sampled tip curve used for evaluation.
struct PositionCurve
{
  std::vector<double> t;
  std::vector<Point3> x;
  std::vector<Vec3> dx_dt;
};

PositionCurve sample_position_curve(const Trajectory& tr, int samples_per_segment);

/// Forward-kinematic image of a joint trajectory; dx/dt = J(q) q'(t).
PositionCurve map_joint_curve(const Trajectory& tr, const Point3& port, const ArmGeometry& arm,
                              int samples_per_segment);

struct PlanResult
{
  Roadmap roadmap;
  std::vector<int> path;  // node indices
  Trajectory trajectory;
  PositionCurve curve;
  std::vector<std::string> warnings;
};

PlanResult plan_joint_space(const Scene& scene, const ArmGeometry& arm, const BoundaryMesh& mesh,
                            const Point3& start, const Point3& goal, const PlannerParams& params,
                            std::uint64_t seed);

PlanResult plan_position_space(const Scene& scene, const Point3& start, const Point3& goal,
                               const PlannerParams& params, std::uint64_t seed);

}  // namespace rmplan
