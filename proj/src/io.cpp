#include "rmplan/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rmplan/error.hpp"

namespace rmplan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v)
{
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content)
{
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory " + target.parent_path().string());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path);
  }
}

std::string mesh_to_obj(const BoundaryMesh& mesh)
{
  std::ostringstream out;
  out << "# joint-space boundary, q1 q2 q3 in degrees\n";
  for (const auto& p : mesh.points)
    out << "v " << num(rad2deg(p.x())) << ' ' << num(rad2deg(p.y())) << ' ' << num(rad2deg(p.z())) << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  return out.str();
}

std::string mesh_sidecar_json(const BoundaryMesh& mesh)
{
  json j;
  j["grid"] = json::array({mesh.n_theta, mesh.n_phi});
  j["vertex_count"] = mesh.size();
  j["triangle_count"] = mesh.triangles.size();
  json verts = json::array();
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto& v = mesh.vertices[i];
    json e{{"theta_deg", rad2deg(v.theta)},
           {"phi_deg", rad2deg(v.phi)},
           {"x_mm", vec_json(v.x)},
           {"primitive", v.primitive}};
    if (i < mesh.patch_id.size()) e["patch"] = mesh.patch_id[i];
    if (i < mesh.curvature.size()) {
      const auto& c = mesh.curvature[i];
      e["K"] = c.K;
      e["H"] = c.H;
      e["nonconcave"] = c.nonconcave;
    }
    verts.push_back(std::move(e));
  }
  j["vertices"] = std::move(verts);
  json patches = json::array();
  for (std::size_t p = 0; p < mesh.patch_count(); ++p)
    patches.push_back({{"id", p}, {"convex", static_cast<bool>(mesh.patch_convex[p])}, {"seed", mesh.patch_seed[p]}});
  j["patches"] = std::move(patches);
  json skipped = json::array();
  for (const auto& s : mesh.skipped)
    skipped.push_back({{"theta_deg", rad2deg(s.theta)}, {"phi_deg", rad2deg(s.phi)}, {"x_mm", vec_json(s.x)}});
  j["skipped"] = std::move(skipped);
  return j.dump(1) + "\n";
}

std::string samples_to_obj(const Scene& scene)
{
  std::ostringstream out;
  out << "# boundary samples of scene " << scene.name() << ", mm\n";
  for (const auto& p : scene.boundary_samples())
    out << "v " << num(p.x()) << ' ' << num(p.y()) << ' ' << num(p.z()) << '\n';
  return out.str();
}

std::string trajectory_csv(const PlanResult& res, const Point3& port, const ArmGeometry& arm)
{
  std::ostringstream out;
  out << "t,q1,q2,q3,q4,q5,x,y,z\n";
  const auto& c = res.curve;
  std::optional<JointConfig> prev;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    std::optional<JointConfig> q;
    if (res.trajectory.space() == Space::Joint) {
      q = try_lift(ReducedConfig(res.trajectory.eval(c.t[i])), port, arm);
    } else {
      q = prev ? try_inverse_kinematics_near(c.x[i], port, arm, *prev) : std::nullopt;
      if (!q) q = try_inverse_kinematics(c.x[i], port, arm);
    }
    prev = q;
    out << num(c.t[i]);
    for (int k = 0; k < 5; ++k) out << ',' << num(q ? rad2deg(q->q[k]) : std::nan(""));
    out << ',' << num(c.x[i].x()) << ',' << num(c.x[i].y()) << ',' << num(c.x[i].z()) << '\n';
  }
  return out.str();
}

std::string roadmap_json(const Roadmap& rm)
{
  json j;
  j["space"] = to_string(rm.space);
  j["units"] = rm.space == Space::Joint ? "deg" : "mm";
  j["start"] = rm.start;
  j["goal"] = rm.goal;
  json nodes = json::array();
  for (const auto& n : rm.nodes) {
    const Vec3 v = rm.space == Space::Joint ? Vec3(rad2deg(n.x()), rad2deg(n.y()), rad2deg(n.z())) : n;
    nodes.push_back(vec_json(v));
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (std::size_t e = 0; e < rm.edges.size(); ++e) {
    const double cost = e < rm.costs.size() ? rm.costs[e] : std::nan("");
    // JSON has no infinity; blocked edges carry null.
    edges.push_back({rm.edges[e].first, rm.edges[e].second, std::isfinite(cost) ? json(cost) : json(nullptr)});
  }
  j["edges"] = std::move(edges);
  return j.dump() + "\n";
}

std::string metrics_json(const MetricsReport& m, Space space, std::uint64_t seed, double sigma,
                         const std::vector<std::string>& warnings)
{
  json j{{"space", to_string(space)},
         {"seed", seed},
         {space == Space::Joint ? "sigma_q_deg" : "sigma_x_mm", space == Space::Joint ? rad2deg(sigma) : sigma},
         {"psi_ave_deg", m.psi_ave_deg},
         {"psi_max_deg", m.psi_max_deg},
         {"dpsi_rms_deg_per_mm", m.dpsi_rms_deg_per_mm},
         {"dpsi_max_deg_per_mm", m.dpsi_max_deg_per_mm},
         {"path_length_mm", m.path_length_mm},
         {"samples", m.s.size()},
         {"excluded_samples", m.excluded_samples}};
  std::vector<std::string> all = warnings;
  all.insert(all.end(), m.warnings.begin(), m.warnings.end());
  j["warnings"] = all;
  return j.dump(2) + "\n";
}

std::string trace_csv(const MetricsReport& m)
{
  std::ostringstream out;
  out << "s,psi_deg,dpsi_deg_per_mm\n";
  for (std::size_t i = 0; i < m.s.size(); ++i)
    out << num(m.s[i]) << ',' << num(m.psi_deg[i]) << ',' << num(m.dpsi_deg_per_mm[i]) << '\n';
  return out.str();
}

std::string comparison_json(const Comparison& cmp)
{
  static const char* cols[4] = {"psi_ave_deg", "psi_max_deg", "dpsi_rms_deg_per_mm", "dpsi_max_deg_per_mm"};
  const auto summary = [&](const ComparisonSummary& s) {
    json mean, spread;
    for (int k = 0; k < 4; ++k) {
      mean[cols[k]] = s.mean[k];
      spread[cols[k]] = s.spread[k];
    }
    return json{{"runs", s.runs}, {"mean", mean}, {"spread", spread}, {"mean_length_mm", s.mean_length_mm}};
  };
  json rows = json::array();
  for (const auto& r : cmp.rows) {
    json row{{"seed", r.seed}, {"space", to_string(r.space)}, {"ok", r.ok}};
    if (r.ok) {
      row["psi_ave_deg"] = r.metrics.psi_ave_deg;
      row["psi_max_deg"] = r.metrics.psi_max_deg;
      row["dpsi_rms_deg_per_mm"] = r.metrics.dpsi_rms_deg_per_mm;
      row["dpsi_max_deg_per_mm"] = r.metrics.dpsi_max_deg_per_mm;
      row["path_length_mm"] = r.metrics.path_length_mm;
    } else {
      row["error"] = r.error;
    }
    rows.push_back(std::move(row));
  }
  json j{{"sigma_x_mm", cmp.sigma_x},
         {"sigma_q_deg", rad2deg(cmp.sigma_q)},
         {"rows", rows},
         {"joint", summary(cmp.joint)},
         {"position", summary(cmp.position)}};
  return j.dump(2) + "\n";
}

std::string calibration_json(const Calibration& cal, double sigma_x)
{
  json j{{"sigma_x_mm", sigma_x},
         {"sigma_q_rad", cal.sigma_q},
         {"sigma_q_deg", rad2deg(cal.sigma_q)},
         {"triangles_used", cal.used},
         {"triangles_skipped", cal.skipped}};
  return j.dump(2) + "\n";
}

}  // namespace rmplan
