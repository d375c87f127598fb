#pragma once

#include <cstddef>
#include <functional>

namespace vcd {

// Hardware concurrency capped by the VECTORCD_THREADS environment variable.
int default_threads();

// Runs body(k) for k in [0, n) on up to `threads` workers (<= 0 means
// default_threads()). The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace vcd
