#pragma once

#include <omp.h>

namespace citemetrics {

inline int max_threads() { return omp_get_max_threads(); }

inline int thread_id() { return omp_get_thread_num(); }

/// 0 leaves the OpenMP default in place.
inline void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace citemetrics
