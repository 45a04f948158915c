#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace grec {

// Runs fn(i) for i in [0, n). jobs <= 1 takes the serial reference path;
// jobs > 1 distributes iterations over OpenMP threads. Work items must write
// only to their own output slot so both paths produce identical bytes.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
#ifdef _OPENMP
  if (jobs > 1) {
    const int threads = jobs;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)jobs;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

inline int hardware_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace grec
