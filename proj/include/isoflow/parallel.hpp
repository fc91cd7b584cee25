#pragma once

#include <cstddef>
#include <functional>

namespace isoflow {

/// Calls fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Work is handed out by an atomic counter; callers write
/// results into slot i, so the outcome does not depend on scheduling. The
/// first exception thrown by any call is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace isoflow
