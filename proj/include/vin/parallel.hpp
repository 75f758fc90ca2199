#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace vin {

// VIN_THREADS overrides the requested thread count when set.
inline int resolve_threads(int requested) {
    if (const char* env = std::getenv("VIN_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return requested > 0 ? requested : 1;
}

// Runs fn(i) for i in [0, n). Tasks must be independent; outputs must
// not depend on scheduling.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace vin
