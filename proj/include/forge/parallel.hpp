#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace forge {

// Worker-pool width: FORGE_THREADS caps it, hardware concurrency is the
// default. Always at least 1.
inline size_t thread_budget() {
    size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("FORGE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = static_cast<size_t>(v);
    }
    return n;
}

// Runs fn(i) for i in [0, n) over contiguous chunks. Callers write results
// into pre-sized slots indexed by i, so output order never depends on
// scheduling. threads == 0 means use the budget.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn, size_t threads = 0) {
    if (n == 0) return;
    if (threads == 0) threads = thread_budget();
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    size_t chunk = (n + threads - 1) / threads;
    for (size_t t = 0; t < threads; ++t) {
        size_t lo = t * chunk;
        size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace forge
