#pragma once

#include <cstddef>
#include <functional>

namespace rpl {

// Worker count from REARRANGE_PL_THREADS (0 or unset = hardware concurrency).
unsigned worker_count();

// Runs body(i) for i in [0, n) over contiguous blocks on up to worker_count()
// threads. Calls made from inside a worker run serially. The first exception
// thrown by any block is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rpl
