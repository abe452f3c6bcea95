#pragma once

#include <cstddef>
#include <functional>

namespace hexweb {

// Worker count: HEXWEB_THREADS when set to a positive integer, otherwise the
// hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads.  Results must
// be written to per-index slots so the outcome does not depend on
// scheduling.  The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hexweb
