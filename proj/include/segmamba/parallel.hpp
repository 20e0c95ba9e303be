#pragma once

#include <cstddef>
#include <functional>

namespace segmamba {

/// Number of worker threads used inside kernels. 1 (the default) runs
/// everything on the calling thread.
void set_num_threads(int n);
int num_threads();

/// Calls fn(begin, end) on disjoint sub-ranges of [0, n). Work items must be
/// independent; results never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace segmamba
