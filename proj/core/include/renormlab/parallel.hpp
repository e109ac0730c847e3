#pragma once

#include <cstddef>
#include <functional>

namespace renormlab {

/// Process-wide worker-pool size (default 1). Results never depend on it:
/// every parallel loop writes to its own output slot and reductions run afterwards in index order.
void set_worker_count(int workers);
int worker_count();

/// Runs fn(i) for i in [0, count) over contiguous chunks. Nested calls run serially.
/// If several iterations throw, the exception of the lowest chunk is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace renormlab
