#pragma once

#include <cstddef>
#include <functional>

namespace deviatile {

// Worker count: DEVIATILE_THREADS if set and positive, else hardware
// concurrency (at least 1).
unsigned default_thread_count();

// Calls body(i) for i in [0, count) on up to `threads` workers. Each index
// runs exactly once; callers write results into slot i and reduce in index
// order afterwards, so output never depends on scheduling. The first
// exception thrown by any body is rethrown after all workers stop.
void parallel_for_index(std::size_t count, unsigned threads,
                        const std::function<void(std::size_t)>& body);

}  // namespace deviatile
