#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cnsf {

/// Worker cap: hardware concurrency, clamped by the CNSF_THREADS variable.
inline int worker_count() {
    int n = int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("CNSF_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

/// Run f(0..n-1) with a bounded number of threads. Each index writes only its
/// own results, so output order (and bytes) never depend on the worker count.
template <class F>
void parallel_for_index(int n, F&& f) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                f(i);
            }
        });
    for (auto& t : pool) t.join();
}

} // namespace cnsf
