#pragma once

#include <cstddef>
#include <functional>

namespace fcont {

/// Worker count used by parallel_for. Defaults to FCONT_THREADS from the
/// environment, falling back to the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over a static partition of [0, n). Chunks are
/// contiguous, so results written by index are independent of the worker
/// count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fcont
