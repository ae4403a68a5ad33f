#pragma once

#include <cstddef>
#include <functional>

namespace dualvfi {

// Worker count used by every parallel loop in the library. 0 selects
// std::thread::hardware_concurrency().
void set_thread_count(int n);
int thread_count();

// Runs fn(begin, end) over [0, n) split into fixed chunks of `grain` items.
// Chunk boundaries depend only on n and grain, never on the thread count, so
// callers that write disjoint outputs per chunk get schedule-independent
// results.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// Row loop convenience: fn(y) for each row.
void parallel_rows(int height, const std::function<void(int)>& fn);

}  // namespace dualvfi
