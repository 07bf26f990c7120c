#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace spinelaw {

// Worker count: the explicit request if given, else SPINELAW_THREADS, else hardware concurrency.
auto resolve_thread_count(std::optional<unsigned> requested) -> unsigned;

// Calls body(worker, i) for every i in [0, n) on up to `threads` workers. Items are claimed
// dynamically, so callers must write results into per-item slots. The first exception thrown
// by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(unsigned, std::size_t)>& body);

}  // namespace spinelaw
