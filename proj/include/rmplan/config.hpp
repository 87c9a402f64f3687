#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmplan/arm_model.hpp"
#include "rmplan/scene.hpp"

namespace rmplan {

inline constexpr int kConfigSchemaVersion = 1;

struct PrimitiveSpec
{
  std::string type;  // sphere | ellipsoid | hemispherical_cavity
  Point3 center = Point3::Zero();
  double radius = 0.0;
  Vec3 radii = Vec3::Zero();
  double cut_z = 0.0;
};

struct SceneSpec
{
  std::string builtin = "hemisphere";  // hemisphere | cholecystectomy | empty for a primitive list
  // hemisphere parameters
  double k = 0.5;
  double d = 0.0;
  Point3 port{750.0, 0.0, -300.0};
  // primitive list
  std::optional<PrimitiveSpec> cavity;
  std::vector<PrimitiveSpec> organs;
  std::optional<double> wall_z;
  double reference_length = 500.0;
};

/// Batch run parameters. Lengths in mm; angles in degrees at this boundary.
struct RunConfig
{
  SceneSpec scene;
  ArmGeometry arm;
  int joint_samples = 1000;      // |V_q|
  int position_samples = 1000;   // |V_x|
  int boundary_samples = 5000;   // |V_a|
  int grid_theta = 30;
  int grid_phi = 30;
  double sigma_x = 5.0;                 // mm
  std::optional<double> sigma_q_deg;    // absent: calibrated from sigma_x
  std::vector<std::uint64_t> seeds{1};
  Point3 start{705.0, -26.0, -330.0};
  Point3 goal{656.0, -26.0, -378.0};
  int samples_per_segment = 1000;
  std::string output_dir = "out";

  /// Throws Error(Config) on out-of-range values.
  void validate() const;
};

/// Parses the JSON document; unknown keys are rejected so typos surface.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Inverse of parse_config (arm limits in degrees).
std::string dump_config(const RunConfig& cfg);

Scene build_scene(const RunConfig& cfg);

}  // namespace rmplan
