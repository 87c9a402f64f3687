#include "rmplan/joint_obstacle_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "rmplan/error.hpp"
#include "rmplan/kernels.hpp"

namespace rmplan {

CurvatureSample implicit_curvature(const Vec3& grad, const Mat3& hess)
{
  const double g2 = grad.squaredNorm();
  if (!(g2 > 0.0)) throw Error(ErrorCode::ZeroGradient, "implicit function has zero gradient");
  Eigen::Matrix4d bordered = Eigen::Matrix4d::Zero();
  bordered.topLeftCorner<3, 3>() = hess;
  bordered.topRightCorner<3, 1>() = grad;
  bordered.bottomLeftCorner<1, 3>() = grad.transpose();
  CurvatureSample c;
  c.K = -bordered.determinant() / (g2 * g2);
  c.H = (g2 * hess.trace() - grad.dot(hess * grad)) / (2.0 * g2 * std::sqrt(g2));
  c.nonconcave = c.K >= 0.0 && c.H >= 0.0;
  return c;
}

namespace {

struct Pullback
{
  Vec3 grad;
  Mat3 hess;
};

Pullback pull_back(const Scene& scene, std::size_t primitive, const TipJet& jet)
{
  const Vec3 gf = scene.free_side_gradient(primitive, jet.x);
  if (gf.norm() < 1e-12) throw Error(ErrorCode::ZeroGradient, "boundary gradient vanishes");
  if (std::abs(jet.jacobian.determinant()) < 1e-12)
    throw Error(ErrorCode::SingularJacobian, "tip Jacobian is singular");
  Pullback p;
  p.grad = jet.jacobian.transpose() * gf;
  p.hess = jet.jacobian.transpose() * scene.free_side_hessian(primitive, jet.x) * jet.jacobian;
  for (int k = 0; k < 3; ++k) p.hess += gf[k] * jet.second[k];
  return p;
}

}  // namespace

CurvatureSample curvature_at(const BoundaryVertex& v, const Scene& scene, const ArmGeometry& arm)
{
  const auto jet = tip_jet(v.q, scene.port(), arm);
  const auto p = pull_back(scene, v.primitive, jet);
  return implicit_curvature(p.grad, p.hess);
}

CurvatureSample curvature_identity(const Scene& scene, std::size_t primitive, const Point3& x)
{
  return implicit_curvature(scene.free_side_gradient(primitive, x),
                            scene.free_side_hessian(primitive, x));
}

void rebuild_adjacency(BoundaryMesh& mesh)
{
  mesh.adjacency.assign(mesh.size(), {});
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      mesh.adjacency[static_cast<std::size_t>(a)].push_back(b);
      mesh.adjacency[static_cast<std::size_t>(b)].push_back(a);
    }
  for (auto& n : mesh.adjacency) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
}

BoundaryMesh build_boundary(const Scene& scene, const ArmGeometry& arm, int n_theta, int n_phi,
                            const BuildOptions& opts)
{
  arm.validate();
  const RayGrid grid = cast_ray_grid(scene, n_theta, n_phi);
  BoundaryMesh mesh;
  mesh.n_theta = n_theta;
  mesh.n_phi = n_phi;

  std::vector<int> remap(grid.vertex_count(), -1);
  for (std::size_t g = 0; g < grid.vertex_count(); ++g) {
    const auto& hit = grid.hits[g];
    const auto& dir = grid.directions[g];
    const auto q = try_inverse_kinematics(hit.x, scene.port(), arm);
    const bool faithful = q && (forward_kinematics(*q, arm).tip - hit.x).norm() <= 1e-6;
    if (!faithful) {
      if (opts.strict) {
        std::ostringstream msg;
        msg << "no in-limit joint configuration for direction theta=" << rad2deg(dir.theta)
            << " deg, phi=" << rad2deg(dir.phi) << " deg";
        throw Error(ErrorCode::IKFailure, msg.str());
      }
      mesh.skipped.push_back({dir.theta, dir.phi, hit.x});
      continue;
    }
    BoundaryVertex v;
    v.lifted = *q;
    v.q = q->reduced();
    v.theta = dir.theta;
    v.phi = dir.phi;
    v.r = hit.r;
    v.x = hit.x;
    v.primitive = hit.primitive;
    const int gi = static_cast<int>(g);
    v.grid_i = gi == grid_vertex_index(n_theta, n_phi, n_theta - 1, 0) ? n_theta - 1 : gi / n_phi;
    v.grid_j = v.grid_i == n_theta - 1 ? 0 : gi % n_phi;
    remap[g] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(v);
    mesh.points.push_back(v.q.q);
  }
  if (mesh.vertices.empty()) throw Error(ErrorCode::EmptyMesh, "no boundary point is reachable");

  for (const auto& t : grid.triangles) {
    const int a = remap[static_cast<std::size_t>(t[0])];
    const int b = remap[static_cast<std::size_t>(t[1])];
    const int c = remap[static_cast<std::size_t>(t[2])];
    if (a < 0 || b < 0 || c < 0) continue;
    mesh.triangles.push_back({a, b, c});
  }
  rebuild_adjacency(mesh);
  return mesh;
}

void classify_curvature(BoundaryMesh& mesh, const Scene& scene, const ArmGeometry& arm)
{
  mesh.curvature.resize(mesh.size());
  mesh.normals.resize(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto& v = mesh.vertices[i];
    const auto jet = tip_jet(v.q, scene.port(), arm);
    const auto p = pull_back(scene, v.primitive, jet);
    mesh.curvature[i] = implicit_curvature(p.grad, p.hess);
    mesh.normals[i] = p.grad.normalized();
  }
}

Vec3 triangle_normal(const BoundaryMesh& mesh, std::size_t t)
{
  const auto& tri = mesh.triangles[t];
  const Vec3& a = mesh.points[static_cast<std::size_t>(tri[0])];
  const Vec3& b = mesh.points[static_cast<std::size_t>(tri[1])];
  const Vec3& c = mesh.points[static_cast<std::size_t>(tri[2])];
  Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  if (len == 0.0) return Vec3::Zero();
  n /= len;
  if (!mesh.normals.empty()) {
    Vec3 ref = Vec3::Zero();
    for (int k = 0; k < 3; ++k) ref += mesh.normals[static_cast<std::size_t>(tri[k])];
    if (n.dot(ref) < 0.0) n = -n;
  }
  return n;
}

namespace {

// Opposite vertex of triangle t relative to edge (a, b).
int opposite(const std::array<int, 3>& t, int a, int b)
{
  for (int k : t)
    if (k != a && k != b) return k;
  return -1;
}

// True if `p` lies on the obstacle side of the plane through `o` with normal n
// (up to an angular tolerance).
bool below_plane(const Vec3& p, const Vec3& o, const Vec3& n, double eps)
{
  const Vec3 d = p - o;
  return n.dot(d) <= eps * d.norm();
}

}  // namespace

void segment_convex_patches(BoundaryMesh& mesh, double eps_dihedral)
{
  if (mesh.curvature.size() != mesh.size())
    throw Error(ErrorCode::InvalidArgument, "curvature must be classified before segmentation");
  const std::size_t n = mesh.size();

  std::map<std::pair<int, int>, std::vector<std::size_t>> edge_tris;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  }
  std::vector<Vec3> tri_normals(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) tri_normals[t] = triangle_normal(mesh, t);

  const auto convex_edge = [&](int a, int b) {
    const auto it = edge_tris.find({std::min(a, b), std::max(a, b)});
    if (it == edge_tris.end()) return false;
    const auto& ts = it->second;
    if (ts.size() < 2) return false;  // open rim: no dihedral to test
    const Vec3& o = mesh.points[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (std::size_t j = 0; j < ts.size(); ++j) {
        if (i == j) continue;
        const int c = opposite(mesh.triangles[ts[j]], a, b);
        if (!below_plane(mesh.points[static_cast<std::size_t>(c)], o, tri_normals[ts[i]], eps_dihedral))
          return false;
      }
    return true;
  };

  // A vertex can join a convex patch only if it is nonconcave and its one-ring
  // is closed; rim vertices (mesh border or holes left by unreachable
  // directions) have no dihedral to test and stay residual.
  std::vector<bool> eligible(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    bool closed = !mesh.adjacency[v].empty();
    for (int w : mesh.adjacency[v]) {
      const auto it = edge_tris.find({std::min<int>(static_cast<int>(v), w), std::max<int>(static_cast<int>(v), w)});
      if (it == edge_tris.end() || it->second.size() < 2) closed = false;
    }
    eligible[v] = closed && mesh.curvature[v].nonconcave;
  }

  mesh.patch_id.assign(n, -1);
  mesh.patch_convex.clear();
  mesh.patch_seed.clear();
  std::vector<std::vector<int>> members;
  for (std::size_t s = 0; s < n; ++s) {
    if (mesh.patch_id[s] >= 0) continue;
    const int label = static_cast<int>(members.size());
    members.emplace_back();
    mesh.patch_id[s] = label;
    const bool convex = eligible[s];
    mesh.patch_convex.push_back(convex);
    std::vector<int> stack{static_cast<int>(s)};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      members.back().push_back(v);
      if (!convex) continue;
      for (int w : mesh.adjacency[static_cast<std::size_t>(v)]) {
        const auto wi = static_cast<std::size_t>(w);
        if (mesh.patch_id[wi] >= 0 || !eligible[wi]) continue;
        // Crossing to another primitive is a crease or an occlusion skirt.
        if (mesh.vertices[wi].primitive != mesh.vertices[static_cast<std::size_t>(v)].primitive) continue;
        if (!convex_edge(v, w)) continue;
        mesh.patch_id[wi] = label;
        stack.push_back(w);
      }
    }
  }

  for (auto& m : members) {
    std::sort(m.begin(), m.end());
    Vec3 centroid = Vec3::Zero();
    for (int v : m) centroid += mesh.points[static_cast<std::size_t>(v)];
    centroid /= static_cast<double>(m.size());
    int seed = m.front();
    double best = std::numeric_limits<double>::infinity();
    for (int v : m) {
      const double d = (mesh.points[static_cast<std::size_t>(v)] - centroid).squaredNorm();
      if (d < best) {
        best = d;
        seed = v;
      }
    }
    mesh.patch_seed.push_back(seed);
  }
}

namespace {

NearestForbidden make_result(const BoundaryMesh& mesh, std::size_t index, double dist_sq)
{
  return {mesh.vertices[index].q, std::sqrt(dist_sq), index};
}

}  // namespace

NearestForbidden nearest_forbidden_bruteforce(const ReducedConfig& q, const BoundaryMesh& mesh)
{
  if (mesh.points.empty()) throw Error(ErrorCode::EmptyMesh, "boundary mesh is empty");
  const auto hit = kernels::nearest_serial(mesh.points, q.q);
  return make_result(mesh, hit.index, hit.dist_sq);
}

NearestForbidden nearest_forbidden_greedy(const ReducedConfig& q, const BoundaryMesh& mesh)
{
  if (mesh.points.empty()) throw Error(ErrorCode::EmptyMesh, "boundary mesh is empty");
  if (mesh.patch_id.size() != mesh.size())
    throw Error(ErrorCode::InvalidArgument, "mesh must be segmented before greedy queries");
  const auto dist_sq = [&](int v) { return (mesh.points[static_cast<std::size_t>(v)] - q.q).squaredNorm(); };

  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < mesh.patch_count(); ++p) {
    int cur = mesh.patch_seed[p];
    double cur_d = dist_sq(cur);
    if (mesh.patch_convex[p]) {
      for (;;) {
        int next = cur;
        double next_d = cur_d;
        for (int w : mesh.adjacency[static_cast<std::size_t>(cur)]) {
          if (mesh.patch_id[static_cast<std::size_t>(w)] != static_cast<int>(p)) continue;
          const double d = dist_sq(w);
          if (d < next_d || (d == next_d && next != cur && w < next)) {
            next = w;
            next_d = d;
          }
        }
        if (next == cur) break;
        cur = next;
        cur_d = next_d;
      }
    }
    const auto c = static_cast<std::size_t>(cur);
    if (cur_d < best_d || (cur_d == best_d && c < best)) {
      best = c;
      best_d = cur_d;
    }
  }
  return make_result(mesh, best, best_d);
}

std::vector<NearestForbidden> nearest_forbidden_batch_serial(const std::vector<ReducedConfig>& qs,
                                                             const BoundaryMesh& mesh)
{
  std::vector<NearestForbidden> out(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) out[i] = nearest_forbidden_greedy(qs[i], mesh);
  return out;
}

std::vector<NearestForbidden> nearest_forbidden_batch_parallel(const std::vector<ReducedConfig>& qs,
                                                               const BoundaryMesh& mesh)
{
  // Errors cannot leave an OpenMP region, so check what greedy would reject.
  if (mesh.points.empty()) throw Error(ErrorCode::EmptyMesh, "boundary mesh is empty");
  if (mesh.patch_id.size() != mesh.size())
    throw Error(ErrorCode::InvalidArgument, "mesh must be segmented before greedy queries");
  std::vector<NearestForbidden> out(qs.size());
  const auto n = static_cast<long long>(qs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = nearest_forbidden_greedy(qs[static_cast<std::size_t>(i)], mesh);
  return out;
}

}  // namespace rmplan
