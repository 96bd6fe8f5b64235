#pragma once

#include <cstddef>
#include <functional>

namespace mvsc::par {

// Caps the number of worker threads (CLI --threads). 0 = hardware default.
void set_max_threads(int threads);
int max_threads();

// Runs fn(begin, end) over disjoint sub-ranges of [begin, end), possibly on
// several threads. Callers must write only to per-index slots; every
// reduction happens sequentially afterwards, so results never depend on the
// thread count.
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn);

}  // namespace mvsc::par
