#pragma once

#include <cstddef>
#include <functional>

namespace nsv {

// Worker count: NSV_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

// Runs fn(i) for i in [0, count) on up to `threads` workers.  Each index is
// processed exactly once; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace nsv
