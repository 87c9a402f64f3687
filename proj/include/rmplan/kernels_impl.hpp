#pragma once

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rmplan::kernels {

template <class Fn>
std::vector<double> map_parallel(std::size_t n, Fn&& fn)
{
  std::vector<double> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace rmplan::kernels
