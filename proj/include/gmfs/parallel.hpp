#pragma once

#include <cstddef>
#include <functional>

namespace gmfs {

/// Worker count: GMFS_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// handled exactly once; callers write only to per-index output slots.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gmfs
