#include "rmplan/commands.hpp"

#include <filesystem>
#include <ostream>
#include <utility>
#include <vector>

#include "rmplan/error.hpp"
#include "rmplan/evaluation.hpp"
#include "rmplan/io.hpp"

namespace rmplan {

namespace {

struct Failure
{
  int code;
  std::string message;
};

template <class F>
auto stage(int code, F&& f) -> decltype(f())
{
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw Failure{kExitIo, e.what()};
    if (e.code() == ErrorCode::Config) throw Failure{kExitConfig, e.what()};
    throw Failure{code, e.what()};
  } catch (const std::exception& e) {
    throw Failure{code, e.what()};
  }
}

template <class F>
int run(std::ostream& log, F&& body)
{
  try {
    body();
    return kExitOk;
  } catch (const Failure& f) {
    log << "error: " << f.message << '\n';
    return f.code;
  }
}

using Artifacts = std::vector<std::pair<std::string, std::string>>;

void write_all(const RunConfig& cfg, const Artifacts& files, std::ostream& log)
{
  stage(kExitIo, [&] {
    for (const auto& [name, content] : files) {
      const auto path = (std::filesystem::path(cfg.output_dir) / name).string();
      write_file_atomic(path, content);
      log << "wrote " << path << '\n';
    }
  });
}

Scene scene_of(const RunConfig& cfg)
{
  return stage(kExitConfig, [&] { return build_scene(cfg); });
}

BoundaryMesh mapped_boundary(const RunConfig& cfg, const Scene& scene)
{
  return stage(kExitMapping, [&] {
    auto mesh = build_boundary(scene, cfg.arm, cfg.grid_theta, cfg.grid_phi);
    classify_curvature(mesh, scene, cfg.arm);
    segment_convex_patches(mesh);
    return mesh;
  });
}

Calibration calibrated(const RunConfig& cfg, const Scene& scene, double sigma_x)
{
  return stage(kExitMapping, [&] {
    const auto pm = boundary_position_mesh(scene, cast_ray_grid(scene, cfg.grid_theta, cfg.grid_phi));
    return calibrate_sigma_q(pm, cfg.arm, scene.port(), sigma_x);
  });
}

PlannerParams planner_params(const RunConfig& cfg, Space space, const Scene& scene, std::ostream& log)
{
  PlannerParams p;
  p.n_samples = space == Space::Joint ? cfg.joint_samples : cfg.position_samples;
  p.sigma_x = cfg.sigma_x;
  p.samples_per_segment = cfg.samples_per_segment;
  if (cfg.sigma_q_deg) {
    p.sigma_q = deg2rad(*cfg.sigma_q_deg);
  } else if (space == Space::Joint) {
    const auto cal = calibrated(cfg, scene, cfg.sigma_x);
    p.sigma_q = cal.sigma_q;
    log << "calibrated sigma_q = " << rad2deg(cal.sigma_q) << " deg from " << cal.used << " triangles\n";
  }
  return p;
}

}  // namespace

int cmd_map(const RunConfig& cfg, std::ostream& log)
{
  return run(log, [&] {
    const auto scene = scene_of(cfg);
    const auto mesh = mapped_boundary(cfg, scene);
    log << "boundary: " << mesh.size() << " vertices, " << mesh.triangles.size() << " triangles, "
        << mesh.patch_count() << " patches, " << mesh.skipped.size() << " skipped directions\n";
    write_all(cfg,
              {{"boundary_mesh.obj", mesh_to_obj(mesh)},
               {"boundary_mesh.json", mesh_sidecar_json(mesh)},
               {"scene_samples.obj", samples_to_obj(scene)}},
              log);
  });
}

int cmd_plan(const RunConfig& cfg, Space space, std::ostream& log)
{
  return run(log, [&] {
    const auto scene = scene_of(cfg);
    const std::uint64_t seed = cfg.seeds.front();
    const auto params = planner_params(cfg, space, scene, log);
    PlanResult res;
    if (space == Space::Joint) {
      const auto mesh = mapped_boundary(cfg, scene);
      res = stage(kExitPlanning,
                  [&] { return plan_joint_space(scene, cfg.arm, mesh, cfg.start, cfg.goal, params, seed); });
    } else {
      res = stage(kExitPlanning, [&] { return plan_position_space(scene, cfg.start, cfg.goal, params, seed); });
    }
    for (const auto& w : res.warnings) log << "warning: " << w << '\n';
    const auto metrics = stage(kExitPlanning, [&] { return evaluate_curve(res.curve, scene.port()); });
    const std::string tag = std::string(to_string(space)) + "_seed" + std::to_string(seed);
    const double sigma = space == Space::Joint ? params.sigma_q : params.sigma_x;
    write_all(cfg,
              {{"trajectory_" + tag + ".csv", trajectory_csv(res, scene.port(), cfg.arm)},
               {"metrics_" + tag + ".json", metrics_json(metrics, space, seed, sigma, res.warnings)},
               {"trace_" + tag + ".csv", trace_csv(metrics)},
               {"roadmap_" + tag + ".json", roadmap_json(res.roadmap)}},
              log);
  });
}

int cmd_compare(const RunConfig& cfg, std::ostream& log)
{
  return run(log, [&] {
    const auto scene = scene_of(cfg);
    const auto mesh = mapped_boundary(cfg, scene);
    auto params = planner_params(cfg, Space::Joint, scene, log);
    params.n_samples = cfg.joint_samples;
    if (cfg.position_samples != cfg.joint_samples)
      log << "warning: compare uses joint_samples for both planners\n";
    const auto cmp = stage(kExitPlanning,
                           [&] { return compare(scene, cfg.arm, mesh, cfg.start, cfg.goal, params, cfg.seeds); });
    for (const auto& r : cmp.rows)
      if (!r.ok) log << "seed " << r.seed << ' ' << to_string(r.space) << " failed: " << r.error << '\n';
    const auto text = format_comparison(cmp);
    log << text;
    write_all(cfg, {{"comparison.json", comparison_json(cmp)}, {"comparison.txt", text}}, log);
  });
}

int cmd_calibrate(const RunConfig& cfg, std::ostream& log)
{
  return run(log, [&] {
    const auto scene = scene_of(cfg);
    const auto cal = calibrated(cfg, scene, cfg.sigma_x);
    log << "sigma_x = " << cfg.sigma_x << " mm -> sigma_q = " << rad2deg(cal.sigma_q) << " deg ("
        << cal.used << " triangles used, " << cal.skipped << " skipped; reference value 0.842 deg)\n";
    write_all(cfg, {{"calibration.json", calibration_json(cal, cfg.sigma_x)}}, log);
  });
}

}  // namespace rmplan
