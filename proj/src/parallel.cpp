#include "fhrd/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fhrd {

int max_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_workers(int count) {
#ifdef _OPENMP
  if (count > 0) {
    omp_set_num_threads(count);
  } else {
    omp_set_num_threads(omp_get_num_procs());
  }
#else
  (void)count;
#endif
}

void for_each_index(int count, bool parallel, const std::function<void(int)>& body) {
  if (!parallel || max_workers() <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  // Exceptions must not escape an OpenMP region; capture the first one and
  // rethrow after the join.
  std::exception_ptr first_error = nullptr;
  std::atomic<bool> has_error{false};
  std::mutex error_mutex;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < count; ++i) {
    if (has_error.load(std::memory_order_relaxed)) continue;
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      has_error.store(true, std::memory_order_relaxed);
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fhrd
