#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace peaksharp {
namespace detail {

/// Worker budget: PEAKSHARP_THREADS caps internal parallelism, 0 or unset = auto.
inline unsigned thread_budget() {
    static const unsigned cached = [] {
        unsigned auto_n = std::thread::hardware_concurrency();
        if (auto_n == 0) auto_n = 1;
        if (const char* env = std::getenv("PEAKSHARP_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end != env && v > 0) return static_cast<unsigned>(v);
        }
        return auto_n;
    }();
    return cached;
}

// Static contiguous split. Each index is processed exactly once and writes
// only its own slot, so results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const unsigned budget = thread_budget();
    if (budget <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(budget, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace detail
} // namespace peaksharp
