#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace paristf {

// Static block partition of [0, n). Loop bodies must write only to their own
// indices; reductions happen afterwards in fixed index order, which keeps
// results bit-identical for every thread count.
inline void parallel_for(int n, int threads, const std::function<void(int, int)>& block) {
    if (n <= 0) return;
    if (threads <= 1 || n < 2 * threads) {
        block(0, n);
        return;
    }
    const int nblocks = threads;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nblocks) - 1);
    const int chunk = (n + nblocks - 1) / nblocks;
    for (int b = 1; b < nblocks; ++b) {
        const int lo = b * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(block, lo, hi);
    }
    block(0, std::min(n, chunk));
    for (auto& th : pool) th.join();
}

}  // namespace paristf
