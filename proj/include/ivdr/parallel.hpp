#pragma once

#include <cstddef>
#include <functional>

namespace ivdr {

/// Number of worker threads to use when the caller does not specify one.
unsigned default_threads();

/// Runs body(i) for i in [0, count) on up to `threads` threads. Indices are
/// handed out dynamically; callers store results by index so the outcome
/// does not depend on scheduling. The first exception thrown by a body is
/// rethrown after all workers have joined.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ivdr
