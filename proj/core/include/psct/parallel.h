#pragma once

#include <cstddef>
#include <functional>

namespace psct {

/// Worker count from the PSCT_WORKERS environment variable, falling back to
/// the hardware concurrency (at least 1).
unsigned default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads.
///
/// Indices are handed out in contiguous blocks; body must only write state
/// owned by its index so results are independent of the worker count.
/// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

} // namespace psct
