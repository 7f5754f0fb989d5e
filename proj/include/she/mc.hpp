#pragma once

#include <cstddef>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

// Trial-parallel execution: OpenMP kernels with a serial reference path.
// Trial bodies must write only to trial-indexed slots; with the counter RNG
// both paths then produce identical bits.

namespace she {

enum class ExecMode { serial, openmp };

template <class Body>
void for_each_trial(std::size_t trials, ExecMode mode, Body&& body) {
  if (mode == ExecMode::openmp) {
#pragma omp parallel for schedule(dynamic, 8)
    for (long long i = 0; i < static_cast<long long>(trials); ++i)
      body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < trials; ++i) body(i);
  }
}

inline int worker_count(ExecMode mode) {
#ifdef _OPENMP
  return mode == ExecMode::openmp ? omp_get_max_threads() : 1;
#else
  (void)mode;
  return 1;
#endif
}

}  // namespace she
