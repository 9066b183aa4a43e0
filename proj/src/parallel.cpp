#include "kct/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>
#include <vector>

namespace kct {

int worker_count() {
  if (const char* env = std::getenv("KCT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // unparsable values fall back to the OpenMP default
    }
  }
  return omp_get_max_threads();
}

void for_each_index(std::size_t count, Execution exec,
                    const std::function<void(std::size_t)>& body) {
  if (exec == Execution::serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> failures(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace kct
