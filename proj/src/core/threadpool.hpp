#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace texsplat {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

// Static strided partition: worker w handles items w, w+W, w+2W, ...
// The assignment depends only on (n_items, n_threads), so reductions that
// merge worker-local state in worker order are reproducible run to run.
template <typename F> inline void parallel_strided(int n_items, int n_threads, F&& fn) {
    n_threads = std::max(1, std::min(n_threads, n_items));
    if (n_threads <= 1) {
        for (int i = 0; i < n_items; ++i) fn(i, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads - 1);
    for (int w = 1; w < n_threads; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n_items; i += n_threads) fn(i, w);
        });
    for (int i = 0; i < n_items; i += n_threads) fn(i, 0);
    for (auto& t : pool) t.join();
}

} // namespace texsplat
