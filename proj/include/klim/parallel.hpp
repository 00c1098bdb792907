#pragma once

#include <cstddef>
#include <functional>

namespace klim {

/// Worker count used when a caller passes threads == 0: $KLIM_THREADS if set,
/// otherwise std::thread::hardware_concurrency().
unsigned default_thread_count();

/// Runs body(i) for i in [0, n) on `threads` workers (0 = default_thread_count()).
/// Indices are handed out in fixed contiguous blocks; body must only write
/// state owned by index i, so results never depend on the worker count.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace klim
