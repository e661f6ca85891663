#pragma once

#include <cstddef>
#include <functional>

namespace connselect {

/// Worker count: hardware concurrency, capped by CONNSELECT_THREADS when set.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads.
/// Callers write results into per-index slots, so output never depends on
/// scheduling. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace connselect
