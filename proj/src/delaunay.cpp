#include "rmplan/delaunay.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "rmplan/error.hpp"

namespace rmplan {

double orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
  return (b - a).dot((c - a).cross(d - a));
}

std::pair<Vec3, double> circumsphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
  Mat3 m;
  m.row(0) = (b - a).transpose();
  m.row(1) = (c - a).transpose();
  m.row(2) = (d - a).transpose();
  const Vec3 rhs(0.5 * (b - a).squaredNorm(), 0.5 * (c - a).squaredNorm(), 0.5 * (d - a).squaredNorm());
  const Vec3 off = m.fullPivLu().solve(rhs);
  return {a + off, off.squaredNorm()};
}

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_hash(std::uint64_t i)
{
  return static_cast<double>(splitmix(i) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

struct Tet
{
  std::array<int, 4> v;
  Vec3 center;
  double radius_sq;
  bool alive = true;
};

using FaceKey = std::array<int, 3>;

FaceKey face_key(int a, int b, int c)
{
  FaceKey k{a, b, c};
  std::sort(k.begin(), k.end());
  return k;
}

struct FaceHash
{
  std::size_t operator()(const FaceKey& k) const
  {
    return splitmix(static_cast<std::uint64_t>(k[0]) * 1000003ULL ^
                    static_cast<std::uint64_t>(k[1]) * 10007ULL ^ static_cast<std::uint64_t>(k[2]));
  }
};

// Faces of tet (a,b,c,d) with outward orientation for a positively oriented tet.
std::array<std::array<int, 3>, 4> tet_faces(const std::array<int, 4>& t)
{
  return {{{t[1], t[2], t[3]}, {t[0], t[3], t[2]}, {t[0], t[1], t[3]}, {t[0], t[2], t[1]}}};
}

}  // namespace

Tetrahedralization delaunay3(const std::vector<Vec3>& input)
{
  const int n = static_cast<int>(input.size());
  if (n < 4) throw Error(ErrorCode::DegenerateInput, "Delaunay needs at least 4 points");
  {
    std::vector<int> order(input.size());
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    const auto key = [&](int i) {
      const auto& p = input[static_cast<std::size_t>(i)];
      return std::array<double, 3>{p.x(), p.y(), p.z()};
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
    for (std::size_t i = 1; i < order.size(); ++i)
      if (key(order[i]) == key(order[i - 1]))
        throw Error(ErrorCode::DegenerateInput, "duplicate point in Delaunay input");
  }

  Vec3 lo = input.front(), hi = input.front();
  for (const auto& p : input) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 mid = 0.5 * (lo + hi);
  const double extent = std::max((hi - lo).maxCoeff(), 1e-300);
  {
    // The jitter would otherwise turn a flat set into slivers.
    Mat3 scatter = Mat3::Zero();
    for (const auto& p : input) {
      const Vec3 d = (p - mid) / extent;
      scatter += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
    if (es.eigenvalues()[0] <= 1e-18 * es.eigenvalues()[2])
      throw Error(ErrorCode::DegenerateInput, "points are coplanar");
  }

  // Work in normalised, perturbed coordinates.
  std::vector<Vec3> pts(input.size() + 4);
  for (int i = 0; i < n; ++i) {
    const auto s = static_cast<std::uint64_t>(i) * 3;
    const Vec3 jitter(unit_hash(s), unit_hash(s + 1), unit_hash(s + 2));
    pts[static_cast<std::size_t>(i)] = (input[static_cast<std::size_t>(i)] - mid) / extent + 1e-10 * jitter;
  }
  const double big = 1e3;
  pts[static_cast<std::size_t>(n)] = Vec3(-big, -big, -big);
  pts[static_cast<std::size_t>(n + 1)] = Vec3(3 * big, -big, -big);
  pts[static_cast<std::size_t>(n + 2)] = Vec3(-big, 3 * big, -big);
  pts[static_cast<std::size_t>(n + 3)] = Vec3(-big, -big, 3 * big);

  std::vector<Tet> tets;
  std::unordered_map<FaceKey, std::array<int, 2>, FaceHash> face_owner;

  const auto add_tet = [&](std::array<int, 4> v) {
    const auto P = [&](int i) -> const Vec3& { return pts[static_cast<std::size_t>(i)]; };
    if (orient3d(P(v[0]), P(v[1]), P(v[2]), P(v[3])) < 0.0) std::swap(v[2], v[3]);
    const auto [c, r2] = circumsphere(P(v[0]), P(v[1]), P(v[2]), P(v[3]));
    const int id = static_cast<int>(tets.size());
    tets.push_back({v, c, r2, true});
    for (const auto& f : tet_faces(v)) {
      auto& owners = face_owner.try_emplace(face_key(f[0], f[1], f[2]), std::array<int, 2>{-1, -1})
                         .first->second;
      if (owners[0] < 0)
        owners[0] = id;
      else
        owners[1] = id;
    }
  };
  const auto remove_tet = [&](int id) {
    auto& t = tets[static_cast<std::size_t>(id)];
    t.alive = false;
    for (const auto& f : tet_faces(t.v)) {
      const auto it = face_owner.find(face_key(f[0], f[1], f[2]));
      auto& owners = it->second;
      if (owners[0] == id) owners[0] = owners[1];
      owners[1] = -1;
      if (owners[0] < 0) face_owner.erase(it);
    }
  };
  const auto neighbour = [&](int id, const std::array<int, 3>& f) {
    const auto it = face_owner.find(face_key(f[0], f[1], f[2]));
    if (it == face_owner.end()) return -1;
    return it->second[0] == id ? it->second[1] : it->second[0];
  };

  add_tet({n, n + 1, n + 2, n + 3});

  int last = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3& p = pts[static_cast<std::size_t>(i)];
    const auto in_sphere = [&](int id) {
      const auto& t = tets[static_cast<std::size_t>(id)];
      return (p - t.center).squaredNorm() < t.radius_sq;
    };
    // Locate a tet whose circumsphere contains p, walking from the last one.
    int start = -1;
    {
      int cur = tets[static_cast<std::size_t>(last)].alive ? last : -1;
      for (int steps = 0; cur >= 0 && steps < 4 * static_cast<int>(tets.size()); ++steps) {
        const auto& t = tets[static_cast<std::size_t>(cur)];
        int next = -1;
        for (const auto& f : tet_faces(t.v)) {
          const auto P = [&](int k) -> const Vec3& { return pts[static_cast<std::size_t>(k)]; };
          if (orient3d(P(f[0]), P(f[1]), P(f[2]), p) > 0.0) {
            next = neighbour(cur, f);
            break;
          }
        }
        if (next < 0) break;
        cur = next;
      }
      if (cur >= 0 && in_sphere(cur)) start = cur;
      if (start < 0)
        for (int id = static_cast<int>(tets.size()) - 1; id >= 0; --id)
          if (tets[static_cast<std::size_t>(id)].alive && in_sphere(id)) {
            start = id;
            break;
          }
    }
    if (start < 0) throw Error(ErrorCode::DegenerateInput, "point location failed");

    std::vector<int> bad{start};
    std::vector<char> mark(tets.size(), 0);
    mark[static_cast<std::size_t>(start)] = 1;
    for (std::size_t k = 0; k < bad.size(); ++k) {
      for (const auto& f : tet_faces(tets[static_cast<std::size_t>(bad[k])].v)) {
        const int nb = neighbour(bad[k], f);
        if (nb < 0 || mark[static_cast<std::size_t>(nb)]) continue;
        mark[static_cast<std::size_t>(nb)] = 1;
        if (in_sphere(nb)) bad.push_back(nb);
      }
    }
    std::vector<std::array<int, 3>> boundary;
    for (int id : bad)
      for (const auto& f : tet_faces(tets[static_cast<std::size_t>(id)].v)) {
        const int nb = neighbour(id, f);
        if (nb < 0 || !in_sphere(nb) || !mark[static_cast<std::size_t>(nb)]) boundary.push_back(f);
      }
    for (int id : bad) remove_tet(id);
    for (const auto& f : boundary) add_tet({f[0], f[1], f[2], i});
    last = static_cast<int>(tets.size()) - 1;
  }

  Tetrahedralization out;
  std::map<std::pair<int, int>, bool> edges;
  for (const auto& t : tets) {
    if (!t.alive) continue;
    if (std::any_of(t.v.begin(), t.v.end(), [&](int k) { return k >= n; })) continue;
    out.tets.push_back(t.v);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        edges[{std::min(t.v[a], t.v[b]), std::max(t.v[a], t.v[b])}] = true;
  }
  if (out.tets.empty()) throw Error(ErrorCode::DegenerateInput, "points are coplanar");
  for (const auto& [e, _] : edges) out.edges.push_back(e);
  return out;
}

}  // namespace rmplan
