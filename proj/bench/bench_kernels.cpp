#include <benchmark/benchmark.h>

#include "../tests/fixtures.hpp"
#include "rmplan/evaluation.hpp"
#include "rmplan/riemannian_metric.hpp"
#include "rmplan/roadmap_planner.hpp"

using namespace rmplan;

namespace {

struct Setup
{
  Scene scene = fixtures::hemisphere();
  ArmGeometry arm;
  BoundaryMesh mesh = fixtures::segmented_boundary(scene, arm, 30, 30);
  PositionMesh position_mesh = boundary_position_mesh(scene, cast_ray_grid(scene, 30, 30));
  std::vector<ReducedConfig> queries = fixtures::visible_free_queries(scene, arm, 2000, 3);
  Roadmap joint_roadmap;
  Roadmap position_roadmap;

  Setup()
  {
    const auto box = joint_sampling_box(scene, arm, mesh);
    const Vec3 s = inverse_kinematics(fixtures::kStart, scene.port(), arm).q.head<3>();
    const Vec3 g = inverse_kinematics(fixtures::kGoal, scene.port(), arm).q.head<3>();
    joint_roadmap = build_roadmap(Space::Joint, sample_free_joint(1000, scene, arm, box, s, g, 1));
    position_roadmap = build_roadmap(Space::Position, sample_free_position(1000, scene, fixtures::kStart,
                                                                           fixtures::kGoal, 1));
  }
};

const Setup& setup()
{
  static const Setup s;
  return s;
}

void BM_NearestBatchSerial(benchmark::State& st)
{
  const auto& s = setup();
  for (auto _ : st) benchmark::DoNotOptimize(nearest_forbidden_batch_serial(s.queries, s.mesh));
}

void BM_NearestBatchParallel(benchmark::State& st)
{
  const auto& s = setup();
  for (auto _ : st) benchmark::DoNotOptimize(nearest_forbidden_batch_parallel(s.queries, s.mesh));
}

void BM_JointEdgeCostsSerial(benchmark::State& st)
{
  const auto& s = setup();
  const ArmKinematicField kin(s.scene.port(), s.arm);
  const MeshObstacleField obs(s.mesh);
  const RiemannianMetric metric(&kin, &obs, deg2rad(1.4));
  for (auto _ : st) benchmark::DoNotOptimize(joint_edge_costs_serial(s.joint_roadmap, metric, s.scene, s.arm));
}

void BM_JointEdgeCostsParallel(benchmark::State& st)
{
  const auto& s = setup();
  const ArmKinematicField kin(s.scene.port(), s.arm);
  const MeshObstacleField obs(s.mesh);
  const RiemannianMetric metric(&kin, &obs, deg2rad(1.4));
  for (auto _ : st) benchmark::DoNotOptimize(joint_edge_costs_parallel(s.joint_roadmap, metric, s.scene, s.arm));
}

void BM_PositionEdgeCostsSerial(benchmark::State& st)
{
  const auto& s = setup();
  for (auto _ : st) benchmark::DoNotOptimize(position_edge_costs_serial(s.position_roadmap, s.scene, 5.0));
}

void BM_PositionEdgeCostsParallel(benchmark::State& st)
{
  const auto& s = setup();
  for (auto _ : st) benchmark::DoNotOptimize(position_edge_costs_parallel(s.position_roadmap, s.scene, 5.0));
}

void BM_CalibrationSerial(benchmark::State& st)
{
  const auto& s = setup();
  for (auto _ : st)
    benchmark::DoNotOptimize(calibrate_sigma_q(s.position_mesh, s.arm, s.scene.port(), 5.0, false));
}

void BM_CalibrationParallel(benchmark::State& st)
{
  const auto& s = setup();
  for (auto _ : st)
    benchmark::DoNotOptimize(calibrate_sigma_q(s.position_mesh, s.arm, s.scene.port(), 5.0, true));
}

}  // namespace

BENCHMARK(BM_NearestBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestBatchParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JointEdgeCostsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JointEdgeCostsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PositionEdgeCostsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PositionEdgeCostsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrationSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrationParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
