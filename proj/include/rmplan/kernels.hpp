#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version and a serial
// reference with identical results; tests compare the two and the benchmark
// target times them.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rmplan/types.hpp"

namespace rmplan::kernels {

struct NearestHit
{
  std::size_t index = 0;
  double dist_sq = std::numeric_limits<double>::infinity();
};

/// Exhaustive nearest point; ties resolve to the lowest index.
NearestHit nearest_serial(std::span<const Vec3> points, const Vec3& query);
NearestHit nearest_parallel(std::span<const Vec3> points, const Vec3& query);

/// One nearest-point scan per query, parallel over queries.
std::vector<NearestHit> nearest_batch_serial(std::span<const Vec3> points,
                                             std::span<const Vec3> queries);
std::vector<NearestHit> nearest_batch_parallel(std::span<const Vec3> points,
                                               std::span<const Vec3> queries);

/// out[i] = fn(i) for i < n. `fn` must be pure; exceptions are rethrown on
/// the calling thread (the lowest failing index wins).
template <class Fn>
std::vector<double> map_serial(std::size_t n, Fn&& fn)
{
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  return out;
}

template <class Fn>
std::vector<double> map_parallel(std::size_t n, Fn&& fn);

int max_threads();

}  // namespace rmplan::kernels

#include "rmplan/kernels_impl.hpp"
