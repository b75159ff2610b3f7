#pragma once

#include <cstddef>
#include <functional>

namespace xner {

/// Caps worker threads for data-parallel loops; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs `body(begin, end)` over fixed chunks of [0, n). Chunk boundaries depend
/// only on `n` and `chunk`, so results are identical for any thread count.
void parallel_for(std::size_t n, std::size_t chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace xner
