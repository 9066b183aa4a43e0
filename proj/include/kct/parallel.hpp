#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace kct {

// Every data-parallel kernel accepts an execution policy. The serial path is
// the reference the parallel path is tested against; both must produce
// identical results.
enum class Execution { serial, parallel };

// Worker count for parallel kernels: KCT_THREADS if set and positive,
// otherwise the OpenMP default.
int worker_count();

// Runs body(i) for i in [0, count). Iterations must be independent. The first
// exception thrown by any iteration (lowest index) is rethrown after the loop.
void for_each_index(std::size_t count, Execution exec,
                    const std::function<void(std::size_t)>& body);

}  // namespace kct
