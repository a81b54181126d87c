#pragma once

#include <cstddef>
#include <functional>

namespace qpathnet {

// Worker threads to use: hardware concurrency, capped by QPATHNET_THREADS
// when that variable holds a positive integer.
std::size_t worker_count();

// Calls body(begin, end) on contiguous, disjoint chunks covering [0, n).
// Chunk boundaries depend on the thread count, so body must write results
// per index; any reduction belongs to the caller, in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace qpathnet
