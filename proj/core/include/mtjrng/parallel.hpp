#pragma once

#include <cstddef>
#include <functional>

namespace mtjrng {

/// Environment variable overriding the default worker count.
inline constexpr const char* kThreadsEnv = "MTJRNG_THREADS";

/// Worker count: MTJRNG_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
unsigned default_thread_count();

/// Calls fn(i) for every i in [0, n) on up to `threads` workers (0 means
/// default_thread_count()).  Work is handed out in contiguous chunks; callers
/// write results by index, so output never depends on scheduling.  The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

}  // namespace mtjrng
