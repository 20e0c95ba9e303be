#include "segmamba/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace segmamba {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

int num_threads() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) {
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(num_threads()), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    const std::size_t step = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t lo = w * step;
        const std::size_t hi = std::min(n, lo + step);
        if (lo < hi) {
            pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
        }
    }
    fn(0, std::min(n, step));
}

} // namespace segmamba
