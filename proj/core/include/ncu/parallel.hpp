#pragma once

#include <cstddef>
#include <functional>

namespace ncu {

/// Number of workers parallel_for will use: hardware concurrency, capped by
/// the NCU_THREADS environment variable when set to a positive integer.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on a static partition of worker threads.
/// Each index writes only its own output slot, so results are bitwise
/// independent of scheduling. Exceptions are captured and rethrown once.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ncu
