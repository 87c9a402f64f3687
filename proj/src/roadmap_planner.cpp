#include "rmplan/roadmap_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

#include "rmplan/delaunay.hpp"
#include "rmplan/error.hpp"
#include "rmplan/kernels.hpp"

namespace rmplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void Roadmap::validate() const
{
  const int n = static_cast<int>(nodes.size());
  if (costs.size() != edges.size()) throw Error(ErrorCode::InvalidArgument, "one cost per edge");
  if (start < 0 || start >= n || goal < 0 || goal >= n)
    throw Error(ErrorCode::InvalidArgument, "start/goal index out of range");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    if (a < 0 || b < 0 || a >= n || b >= n) throw Error(ErrorCode::InvalidArgument, "edge index out of range");
    if (a == b) throw Error(ErrorCode::InvalidArgument, "self-loop in roadmap");
    if (!(costs[e] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative or NaN edge cost");
  }
}

std::vector<int> dijkstra(const Roadmap& roadmap, int src, int dst)
{
  roadmap.validate();
  const auto n = roadmap.nodes.size();
  if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= n || static_cast<std::size_t>(dst) >= n)
    throw Error(ErrorCode::InvalidArgument, "query node out of range");
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (std::size_t e = 0; e < roadmap.edges.size(); ++e) {
    if (std::isinf(roadmap.costs[e])) continue;
    const auto [a, b] = roadmap.edges[e];
    adj[static_cast<std::size_t>(a)].push_back({b, roadmap.costs[e]});
    adj[static_cast<std::size_t>(b)].push_back({a, roadmap.costs[e]});
  }
  std::vector<double> dist(n, kInf);
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[static_cast<std::size_t>(src)] = 0.0;
  open.push({0.0, src});
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u == dst) break;
    for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
      const double nd = d + w;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        prev[static_cast<std::size_t>(v)] = u;
        open.push({nd, v});
      }
    }
  }
  if (std::isinf(dist[static_cast<std::size_t>(dst)]))
    throw Error(ErrorCode::Unreachable, "goal is not connected to the start");
  std::vector<int> path;
  for (int v = dst; v >= 0; v = prev[static_cast<std::size_t>(v)]) {
    path.push_back(v);
    if (v == src) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

bool joint_config_free(const ReducedConfig& q, const Scene& scene, const ArmGeometry& arm)
{
  const auto lifted = try_lift(q, scene.port(), arm);
  if (!lifted) return false;
  return scene.is_visible_free(forward_kinematics_unchecked(lifted->q, arm).tip);
}

JointBox joint_sampling_box(const Scene& scene, const ArmGeometry& arm, const BoundaryMesh& mesh)
{
  if (mesh.points.empty()) throw Error(ErrorCode::EmptyMesh, "boundary mesh is empty");
  Vec3 lo = mesh.points.front(), hi = lo;
  const auto include = [&](const Point3& x) {
    if (const auto q = try_inverse_kinematics(x, scene.port(), arm)) {
      lo = lo.cwiseMin(q->q.head<3>());
      hi = hi.cwiseMax(q->q.head<3>());
    }
  };
  for (const auto& p : mesh.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Interior shells along the mesh rays and a ring just under the wall.
  for (const auto& v : mesh.vertices) {
    const Vec3 e = (v.x - scene.port()) / v.r;
    for (double s : {0.02, 0.5}) include(scene.port() + s * v.r * e);
  }
  for (int j = 0; j < 72; ++j) {
    const SphericalDirection dir(kPi / 2 + 0.005, 2.0 * kPi * j / 72.0);
    double r = 0.0;
    try {
      r = ray_cast(scene, dir).r;
    } catch (const Error&) {
      continue;
    }
    for (double s : {0.05, 0.5, 0.95}) include(scene.port() + s * r * dir.unit());
  }
  const Vec3 pad = 0.05 * (hi - lo);
  JointBox box{lo - pad, hi + pad};
  for (int i = 0; i < 3; ++i) {
    box.lo[i] = std::max(box.lo[i], arm.limits[i].min);
    box.hi[i] = std::min(box.hi[i], arm.limits[i].max);
  }
  return box;
}

std::vector<Vec3> sample_free_position(int n, const Scene& scene, const Point3& start,
                                       const Point3& goal, std::uint64_t seed)
{
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 samples");
  std::vector<Vec3> out{start, goal};
  auto [lo, hi] = scene.free_bounds();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y()), uz(lo.z(), hi.z());
  const long long budget = 1000LL * n;
  long long draws = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++draws > budget) throw Error(ErrorCode::RejectionBudgetExceeded, "position sampling budget exhausted");
    const Point3 x(ux(rng), uy(rng), uz(rng));
    if (scene.is_visible_free(x)) out.push_back(x);
  }
  return out;
}

std::vector<Vec3> sample_free_joint(int n, const Scene& scene, const ArmGeometry& arm,
                                    const JointBox& box, const Vec3& start, const Vec3& goal,
                                    std::uint64_t seed)
{
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 samples");
  std::vector<Vec3> out{start, goal};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u1(box.lo[0], box.hi[0]), u2(box.lo[1], box.hi[1]),
      u3(box.lo[2], box.hi[2]);
  const long long budget = 1000LL * n;
  long long draws = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++draws > budget) throw Error(ErrorCode::RejectionBudgetExceeded, "joint sampling budget exhausted");
    const Vec3 q(u1(rng), u2(rng), u3(rng));
    if (joint_config_free(ReducedConfig(q), scene, arm)) out.push_back(q);
  }
  return out;
}

bool joint_edge_free(const Vec3& qa, const Vec3& qb, const Scene& scene, const ArmGeometry& arm,
                     double max_step_mm)
{
  const auto la = try_lift(ReducedConfig(qa), scene.port(), arm);
  const auto lb = try_lift(ReducedConfig(qb), scene.port(), arm);
  if (!la || !lb) return false;
  const Point3 xa = forward_kinematics_unchecked(la->q, arm).tip;
  const Point3 xb = forward_kinematics_unchecked(lb->q, arm).tip;
  if (!scene.is_visible_free(xa) || !scene.is_visible_free(xb)) return false;
  const int steps = std::clamp(static_cast<int>(std::ceil((xb - xa).norm() / max_step_mm)), 1, 256);
  for (int k = 1; k < steps; ++k) {
    const double s = static_cast<double>(k) / steps;
    if (!joint_config_free(ReducedConfig(qa + s * (qb - qa)), scene, arm)) return false;
  }
  return true;
}

bool position_edge_free(const Vec3& xa, const Vec3& xb, const Scene& scene)
{
  if (!scene.is_visible_free(xa) || !scene.is_visible_free(xb)) return false;
  if (!scene.segment_clear(xa, xb)) return false;
  const int steps = std::clamp(static_cast<int>(std::ceil((xb - xa).norm() / 2.0)), 1, 256);
  for (int k = 1; k < steps; ++k)
    if (!scene.is_visible_free(xa + (xb - xa) * (static_cast<double>(k) / steps))) return false;
  return true;
}

namespace {

double joint_cost(const Roadmap& rm, std::size_t e, const RiemannianMetric& metric, const Scene& scene,
                  const ArmGeometry& arm)
{
  const auto [a, b] = rm.edges[e];
  const Vec3& qa = rm.nodes[static_cast<std::size_t>(a)];
  const Vec3& qb = rm.nodes[static_cast<std::size_t>(b)];
  if (!joint_edge_free(qa, qb, scene, arm)) return kInf;
  // The step checks may straddle the midpoint; an unliftable midpoint is a blocked edge.
  try {
    return edge_cost(ReducedConfig(qa), ReducedConfig(qb), metric);
  } catch (const Error&) {
    return kInf;
  }
}

double position_cost(const Roadmap& rm, std::size_t e, const Scene& scene, double sigma_x)
{
  const auto [a, b] = rm.edges[e];
  const Vec3& xa = rm.nodes[static_cast<std::size_t>(a)];
  const Vec3& xb = rm.nodes[static_cast<std::size_t>(b)];
  if (!position_edge_free(xa, xb, scene)) return kInf;
  return baseline_edge_cost(xa, xb, scene, sigma_x);
}

}  // namespace

std::vector<double> joint_edge_costs_serial(const Roadmap& rm, const RiemannianMetric& metric,
                                            const Scene& scene, const ArmGeometry& arm)
{
  return kernels::map_serial(rm.edges.size(), [&](std::size_t e) { return joint_cost(rm, e, metric, scene, arm); });
}

std::vector<double> joint_edge_costs_parallel(const Roadmap& rm, const RiemannianMetric& metric,
                                              const Scene& scene, const ArmGeometry& arm)
{
  return kernels::map_parallel(rm.edges.size(),
                               [&](std::size_t e) { return joint_cost(rm, e, metric, scene, arm); });
}

std::vector<double> position_edge_costs_serial(const Roadmap& rm, const Scene& scene, double sigma_x)
{
  return kernels::map_serial(rm.edges.size(), [&](std::size_t e) { return position_cost(rm, e, scene, sigma_x); });
}

std::vector<double> position_edge_costs_parallel(const Roadmap& rm, const Scene& scene, double sigma_x)
{
  return kernels::map_parallel(rm.edges.size(),
                               [&](std::size_t e) { return position_cost(rm, e, scene, sigma_x); });
}

Roadmap build_roadmap(Space space, const std::vector<Vec3>& nodes)
{
  Roadmap rm;
  rm.space = space;
  rm.nodes = nodes;
  if (nodes.size() < 4) {
    for (int a = 0; a < static_cast<int>(nodes.size()); ++a)
      for (int b = a + 1; b < static_cast<int>(nodes.size()); ++b) rm.edges.push_back({a, b});
  } else {
    rm.edges = delaunay3(nodes).edges;
  }
  return rm;
}

namespace {

template <class Fn>
PositionCurve sample_curve(const Trajectory& tr, int per_segment, Fn&& point)
{
  if (per_segment < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample per segment");
  PositionCurve c;
  const auto& t = tr.params();
  if (tr.segment_count() == 0) {
    if (!t.empty()) point(0.0, c);
    return c;
  }
  for (std::size_t k = 0; k < tr.segment_count(); ++k)
    for (int j = 0; j < per_segment; ++j)
      point(t[k] + (t[k + 1] - t[k]) * (static_cast<double>(j) / per_segment), c);
  point(t.back(), c);
  return c;
}

// Groups consecutive flagged samples into [t0, t1] arcs.
std::vector<std::string> clearance_warnings(const PositionCurve& c, const std::vector<char>& bad)
{
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < bad.size()) {
    if (!bad[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < bad.size() && bad[j + 1]) ++j;
    std::ostringstream msg;
    msg << "clearance violated on t in [" << c.t[i] << ", " << c.t[j] << "] (" << (j - i + 1)
        << " samples)";
    out.push_back(msg.str());
    i = j + 1;
  }
  return out;
}

}  // namespace

PositionCurve sample_position_curve(const Trajectory& tr, int samples_per_segment)
{
  return sample_curve(tr, samples_per_segment, [&](double t, PositionCurve& c) {
    c.t.push_back(t);
    c.x.push_back(tr.eval(t));
    c.dx_dt.push_back(tr.d1(t));
  });
}

PositionCurve map_joint_curve(const Trajectory& tr, const Point3& port, const ArmGeometry& arm,
                              int samples_per_segment)
{
  return sample_curve(tr, samples_per_segment, [&](double t, PositionCurve& c) {
    const auto jet = tip_jet(ReducedConfig(tr.eval(t)), port, arm);
    c.t.push_back(t);
    c.x.push_back(jet.x);
    c.dx_dt.push_back(jet.jacobian * tr.d1(t));
  });
}

PlanResult plan_joint_space(const Scene& scene, const ArmGeometry& arm, const BoundaryMesh& mesh,
                            const Point3& start, const Point3& goal, const PlannerParams& params,
                            std::uint64_t seed)
{
  const auto qs = try_inverse_kinematics(start, scene.port(), arm);
  const auto qg = try_inverse_kinematics(goal, scene.port(), arm);
  if (!qs) throw Error(ErrorCode::IKFailure, "start point has no in-limit joint configuration");
  if (!qg) throw Error(ErrorCode::IKFailure, "goal point has no in-limit joint configuration");
  const Vec3 s = qs->q.head<3>();
  const Vec3 g = qg->q.head<3>();

  PlanResult res;
  if (s == g) {
    res.roadmap = Roadmap{Space::Joint, {s}, {}, {}, 0, 0};
    res.path = {0};
    res.trajectory = spline_fit({}, s, g, Space::Joint);
    res.curve = map_joint_curve(res.trajectory, scene.port(), arm, params.samples_per_segment);
    return res;
  }

  const auto box = joint_sampling_box(scene, arm, mesh);
  const auto nodes = sample_free_joint(params.n_samples, scene, arm, box, s, g, seed);
  res.roadmap = build_roadmap(Space::Joint, nodes);
  const ArmKinematicField kin(scene.port(), arm);
  const MeshObstacleField obs(mesh);
  const RiemannianMetric metric(&kin, &obs, params.sigma_q);
  res.roadmap.costs = params.parallel ? joint_edge_costs_parallel(res.roadmap, metric, scene, arm)
                                      : joint_edge_costs_serial(res.roadmap, metric, scene, arm);
  res.path = dijkstra(res.roadmap, res.roadmap.start, res.roadmap.goal);

  std::vector<Vec3> seq;
  for (int v : res.path) seq.push_back(res.roadmap.nodes[static_cast<std::size_t>(v)]);
  res.trajectory = spline_fit(seq, s, g, Space::Joint);
  res.warnings = res.trajectory.warnings();
  res.curve = map_joint_curve(res.trajectory, scene.port(), arm, params.samples_per_segment);

  std::vector<char> bad(res.curve.x.size(), 0);
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const ReducedConfig q(res.trajectory.eval(res.curve.t[i]));
    bad[i] = !within_limits(arm, q) || !scene.is_visible_free(res.curve.x[i]);
  }
  for (auto& w : clearance_warnings(res.curve, bad)) res.warnings.push_back(std::move(w));
  return res;
}

PlanResult plan_position_space(const Scene& scene, const Point3& start, const Point3& goal,
                               const PlannerParams& params, std::uint64_t seed)
{
  PlanResult res;
  if (start == goal) {
    res.roadmap = Roadmap{Space::Position, {start}, {}, {}, 0, 0};
    res.path = {0};
    res.trajectory = spline_fit({}, start, goal, Space::Position);
    res.curve = sample_position_curve(res.trajectory, params.samples_per_segment);
    return res;
  }
  const auto nodes = sample_free_position(params.n_samples, scene, start, goal, seed);
  res.roadmap = build_roadmap(Space::Position, nodes);
  res.roadmap.costs = params.parallel ? position_edge_costs_parallel(res.roadmap, scene, params.sigma_x)
                                      : position_edge_costs_serial(res.roadmap, scene, params.sigma_x);
  res.path = dijkstra(res.roadmap, res.roadmap.start, res.roadmap.goal);

  std::vector<Vec3> seq;
  for (int v : res.path) seq.push_back(res.roadmap.nodes[static_cast<std::size_t>(v)]);
  res.trajectory = spline_fit(seq, start, goal, Space::Position);
  res.warnings = res.trajectory.warnings();
  res.curve = sample_position_curve(res.trajectory, params.samples_per_segment);

  std::vector<char> bad(res.curve.x.size(), 0);
  for (std::size_t i = 0; i < bad.size(); ++i) bad[i] = !scene.is_visible_free(res.curve.x[i]);
  for (auto& w : clearance_warnings(res.curve, bad)) res.warnings.push_back(std::move(w));
  return res;
}

}  // namespace rmplan
