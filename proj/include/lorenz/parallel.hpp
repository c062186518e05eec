#pragma once

#include <cstddef>
#include <functional>

namespace lorenz {

/// Worker count: LORENZ_LAB_THREADS when set and positive, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Run body(i) for i in [0, n). Results must be written by index; the first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lorenz
