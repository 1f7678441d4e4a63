#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace owsol {

// Static block partition over [0, n). Work items must be independent; each
// index is visited exactly once, so writes to disjoint slots stay
// deterministic regardless of worker count.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int t = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int w = 0; w < t; ++w) {
        const int lo = static_cast<int>(static_cast<long long>(n) * w / t);
        const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / t);
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace owsol
