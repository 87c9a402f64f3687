#include "rmplan/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rmplan/error.hpp"

namespace rmplan {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed)
{
  if (!obj.is_object()) fail(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
}

double number(const json& v, const std::string& what)
{
  if (!v.is_number()) fail(what + " must be a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& what)
{
  if (!v.is_number_integer()) fail(what + " must be an integer");
  return v.get<int>();
}

Vec3 vec3(const json& v, const std::string& what)
{
  if (!v.is_array() || v.size() != 3) fail(what + " must be an array of 3 numbers");
  return Vec3(number(v[0], what), number(v[1], what), number(v[2], what));
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

PrimitiveSpec parse_primitive(const json& j, const std::string& where)
{
  check_keys(j, where, {"type", "center", "radius", "radii", "cut_z"});
  PrimitiveSpec p;
  if (!j.contains("type") || !j["type"].is_string()) fail(where + ".type is required");
  p.type = j["type"].get<std::string>();
  if (!j.contains("center")) fail(where + ".center is required");
  p.center = vec3(j["center"], where + ".center");
  if (p.type == "sphere" || p.type == "hemispherical_cavity") {
    if (!j.contains("radius")) fail(where + ".radius is required");
    p.radius = number(j["radius"], where + ".radius");
    if (p.type == "hemispherical_cavity") {
      if (!j.contains("cut_z")) fail(where + ".cut_z is required");
      p.cut_z = number(j["cut_z"], where + ".cut_z");
    }
  } else if (p.type == "ellipsoid") {
    if (!j.contains("radii")) fail(where + ".radii is required");
    p.radii = vec3(j["radii"], where + ".radii");
  } else {
    fail(where + ".type must be sphere, ellipsoid or hemispherical_cavity");
  }
  return p;
}

json primitive_json(const PrimitiveSpec& p)
{
  json j{{"type", p.type}, {"center", to_json(p.center)}};
  if (p.type == "ellipsoid")
    j["radii"] = to_json(p.radii);
  else
    j["radius"] = p.radius;
  if (p.type == "hemispherical_cavity") j["cut_z"] = p.cut_z;
  return j;
}

ImplicitSurface make_surface(const PrimitiveSpec& p)
{
  if (p.type == "sphere") return ImplicitSurface::sphere(p.center, p.radius);
  if (p.type == "ellipsoid") return ImplicitSurface::ellipsoid(p.center, p.radii);
  return ImplicitSurface::hemispherical_cavity(p.center, p.radius, p.cut_z);
}

void parse_scene(const json& j, SceneSpec& s)
{
  check_keys(j, "scene", {"builtin", "k", "d", "port", "cavity", "organs", "wall_z", "reference_length"});
  if (j.contains("builtin")) {
    if (!j["builtin"].is_string()) fail("scene.builtin must be a string");
    s.builtin = j["builtin"].get<std::string>();
  } else {
    s.builtin.clear();
  }
  if (j.contains("k")) s.k = number(j["k"], "scene.k");
  if (j.contains("d")) s.d = number(j["d"], "scene.d");
  if (j.contains("port")) s.port = vec3(j["port"], "scene.port");
  if (j.contains("cavity")) s.cavity = parse_primitive(j["cavity"], "scene.cavity");
  if (j.contains("organs")) {
    if (!j["organs"].is_array()) fail("scene.organs must be an array");
    for (std::size_t i = 0; i < j["organs"].size(); ++i)
      s.organs.push_back(parse_primitive(j["organs"][i], "scene.organs[" + std::to_string(i) + "]"));
  }
  if (j.contains("wall_z")) s.wall_z = number(j["wall_z"], "scene.wall_z");
  if (j.contains("reference_length")) s.reference_length = number(j["reference_length"], "scene.reference_length");
}

void parse_arm(const json& j, ArmGeometry& a)
{
  check_keys(j, "arm", {"l2", "l3", "d_x", "d_z", "forceps_length", "base", "wrist_yaw_offset_deg", "limits_deg"});
  if (j.contains("l2")) a.l2 = number(j["l2"], "arm.l2");
  if (j.contains("l3")) a.l3 = number(j["l3"], "arm.l3");
  if (j.contains("d_x")) a.d_x = number(j["d_x"], "arm.d_x");
  if (j.contains("d_z")) a.d_z = number(j["d_z"], "arm.d_z");
  if (j.contains("forceps_length")) a.forceps_length = number(j["forceps_length"], "arm.forceps_length");
  if (j.contains("base")) a.base = vec3(j["base"], "arm.base");
  if (j.contains("wrist_yaw_offset_deg"))
    a.wrist_yaw_offset = deg2rad(number(j["wrist_yaw_offset_deg"], "arm.wrist_yaw_offset_deg"));
  if (j.contains("limits_deg")) {
    const auto& l = j["limits_deg"];
    if (!l.is_array() || l.size() != 5) fail("arm.limits_deg must hold 5 [min, max] pairs");
    for (std::size_t i = 0; i < 5; ++i) {
      if (!l[i].is_array() || l[i].size() != 2) fail("arm.limits_deg entries must be [min, max]");
      a.limits[i] = {deg2rad(number(l[i][0], "arm.limits_deg")), deg2rad(number(l[i][1], "arm.limits_deg"))};
    }
  }
}

}  // namespace

void RunConfig::validate() const
{
  if (joint_samples < 2 || position_samples < 2) fail("sample counts must be at least 2");
  if (boundary_samples < 4) fail("boundary_samples must be at least 4");
  if (grid_theta < 4 || grid_phi < 8) fail("grid must be at least [4, 8]");
  if (!(sigma_x >= 0.0)) fail("sigma_x_mm must be >= 0");
  if (sigma_q_deg && !(*sigma_q_deg >= 0.0)) fail("sigma_q_deg must be >= 0");
  if (seeds.empty()) fail("seeds must not be empty");
  if (samples_per_segment < 1) fail("samples_per_segment must be positive");
  if (output_dir.empty()) fail("output_dir must not be empty");
  if (scene.builtin != "hemisphere" && scene.builtin != "cholecystectomy" && !scene.builtin.empty())
    fail("scene.builtin must be hemisphere or cholecystectomy");
  if (scene.builtin.empty() && !scene.cavity) fail("a primitive-list scene needs a cavity");
  try {
    arm.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

RunConfig parse_config(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"schema_version", "scene", "arm", "joint_samples", "position_samples", "boundary_samples", "grid",
              "sigma_x_mm", "sigma_q_deg", "seeds", "start", "goal", "samples_per_segment", "output_dir"});
  if (!j.contains("schema_version")) fail("schema_version is required");
  if (integer(j["schema_version"], "schema_version") != kConfigSchemaVersion)
    fail("unsupported schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");

  RunConfig c;
  if (j.contains("scene")) parse_scene(j["scene"], c.scene);
  if (j.contains("arm")) parse_arm(j["arm"], c.arm);
  if (j.contains("joint_samples")) c.joint_samples = integer(j["joint_samples"], "joint_samples");
  if (j.contains("position_samples")) c.position_samples = integer(j["position_samples"], "position_samples");
  if (j.contains("boundary_samples")) c.boundary_samples = integer(j["boundary_samples"], "boundary_samples");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (!g.is_array() || g.size() != 2) fail("grid must be [n_theta, n_phi]");
    c.grid_theta = integer(g[0], "grid");
    c.grid_phi = integer(g[1], "grid");
  }
  if (j.contains("sigma_x_mm")) c.sigma_x = number(j["sigma_x_mm"], "sigma_x_mm");
  if (j.contains("sigma_q_deg") && !j["sigma_q_deg"].is_null())
    c.sigma_q_deg = number(j["sigma_q_deg"], "sigma_q_deg");
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    if (!s.is_array()) fail("seeds must be an array");
    c.seeds.clear();
    for (const auto& v : s) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        fail("seeds must be non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (j.contains("start")) c.start = vec3(j["start"], "start");
  if (j.contains("goal")) c.goal = vec3(j["goal"], "goal");
  if (j.contains("samples_per_segment"))
    c.samples_per_segment = integer(j["samples_per_segment"], "samples_per_segment");
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail("output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) fail("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c)
{
  json scene;
  if (!c.scene.builtin.empty()) scene["builtin"] = c.scene.builtin;
  scene["k"] = c.scene.k;
  scene["d"] = c.scene.d;
  scene["port"] = to_json(c.scene.port);
  if (c.scene.cavity) scene["cavity"] = primitive_json(*c.scene.cavity);
  if (!c.scene.organs.empty()) {
    scene["organs"] = json::array();
    for (const auto& o : c.scene.organs) scene["organs"].push_back(primitive_json(o));
  }
  if (c.scene.wall_z) scene["wall_z"] = *c.scene.wall_z;
  scene["reference_length"] = c.scene.reference_length;

  json limits = json::array();
  for (const auto& r : c.arm.limits) limits.push_back(json::array({rad2deg(r.min), rad2deg(r.max)}));
  json arm{{"l2", c.arm.l2},
           {"l3", c.arm.l3},
           {"d_x", c.arm.d_x},
           {"d_z", c.arm.d_z},
           {"forceps_length", c.arm.forceps_length},
           {"base", to_json(c.arm.base)},
           {"wrist_yaw_offset_deg", rad2deg(c.arm.wrist_yaw_offset)},
           {"limits_deg", limits}};

  json j{{"schema_version", kConfigSchemaVersion},
         {"scene", scene},
         {"arm", arm},
         {"joint_samples", c.joint_samples},
         {"position_samples", c.position_samples},
         {"boundary_samples", c.boundary_samples},
         {"grid", json::array({c.grid_theta, c.grid_phi})},
         {"sigma_x_mm", c.sigma_x},
         {"seeds", c.seeds},
         {"start", to_json(c.start)},
         {"goal", to_json(c.goal)},
         {"samples_per_segment", c.samples_per_segment},
         {"output_dir", c.output_dir}};
  if (c.sigma_q_deg) j["sigma_q_deg"] = *c.sigma_q_deg;
  return j.dump(2);
}

Scene build_scene(const RunConfig& cfg)
{
  const auto& s = cfg.scene;
  if (s.builtin == "hemisphere")
    return make_hemisphere_scene(cfg.arm.forceps_length, s.k, s.port, s.d, cfg.boundary_samples);
  if (s.builtin == "cholecystectomy") return make_cholecystectomy_scene(cfg.boundary_samples);
  std::vector<ImplicitSurface> organs;
  for (const auto& o : s.organs) organs.push_back(make_surface(o));
  return Scene("custom", s.port, make_surface(*s.cavity), std::move(organs), s.wall_z, s.reference_length,
               cfg.boundary_samples);
}

}  // namespace rmplan
