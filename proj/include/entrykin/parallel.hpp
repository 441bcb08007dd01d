#pragma once

#include <cstddef>
#include <functional>

namespace entrykin {

/// Resolves a user thread request: 0 means hardware concurrency (at least 1).
[[nodiscard]] unsigned resolve_threads(unsigned requested) noexcept;

/// Runs body(i) for i in [0, n) on up to `threads` workers. Items are claimed dynamically, so
/// callers must write results into per-index slots. The first exception thrown by any body is
/// rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace entrykin
