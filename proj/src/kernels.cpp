#include "rmplan/kernels.hpp"

#include <vector>

namespace rmplan::kernels {

namespace {

bool better(const NearestHit& a, const NearestHit& b)
{
  return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.index < b.index);
}

}  // namespace

NearestHit nearest_serial(std::span<const Vec3> points, const Vec3& query)
{
  NearestHit best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - query).squaredNorm();
    if (d < best.dist_sq) best = {i, d};
  }
  return best;
}

NearestHit nearest_parallel(std::span<const Vec3> points, const Vec3& query)
{
  const auto n = static_cast<long long>(points.size());
  const int threads = max_threads();
  std::vector<NearestHit> partial(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
  {
#ifdef _OPENMP
    const int t = omp_get_thread_num();
#else
    const int t = 0;
#endif
    NearestHit local;
#pragma omp for schedule(static)
    for (long long i = 0; i < n; ++i) {
      const double d = (points[static_cast<std::size_t>(i)] - query).squaredNorm();
      if (d < local.dist_sq) local = {static_cast<std::size_t>(i), d};
    }
    partial[static_cast<std::size_t>(t)] = local;
  }
  NearestHit best;
  for (const auto& p : partial)
    if (better(p, best)) best = p;
  return best;
}

std::vector<NearestHit> nearest_batch_serial(std::span<const Vec3> points,
                                             std::span<const Vec3> queries)
{
  std::vector<NearestHit> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) out[q] = nearest_serial(points, queries[q]);
  return out;
}

std::vector<NearestHit> nearest_batch_parallel(std::span<const Vec3> points,
                                               std::span<const Vec3> queries)
{
  std::vector<NearestHit> out(queries.size());
  const auto n = static_cast<long long>(queries.size());
#pragma omp parallel for schedule(static)
  for (long long q = 0; q < n; ++q)
    out[static_cast<std::size_t>(q)] = nearest_serial(points, queries[static_cast<std::size_t>(q)]);
  return out;
}

int max_threads()
{
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace rmplan::kernels
