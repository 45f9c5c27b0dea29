#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace forestmap {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition of [0, n). Each worker owns a disjoint index range,
// so results land in pre-sized slots and are identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const int t = resolve_threads(threads);
    if (n == 0) return;
    if (t <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(t), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace forestmap
