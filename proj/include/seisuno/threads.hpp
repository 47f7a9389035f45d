#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace seisuno::threads {

namespace detail {
inline std::atomic<int> g_default_workers{0};  // 0 = hardware concurrency
inline thread_local int g_serial_depth = 0;
}  // namespace detail

inline void set_default_workers(int n) { detail::g_default_workers.store(n); }

inline int default_workers() {
    const int n = detail::g_default_workers.load();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Forces parallel_for to run inline on this thread for the caller's lifetime.
// Used by task-level parallelism (e.g. one training sample per worker) to
// keep nested loops from oversubscribing.
class ScopedSerial {
public:
    ScopedSerial() { ++detail::g_serial_depth; }
    ~ScopedSerial() { --detail::g_serial_depth; }
    ScopedSerial(const ScopedSerial&) = delete;
    ScopedSerial& operator=(const ScopedSerial&) = delete;
};

// Static block partition of [0, n). The assignment of indices to workers is
// a pure function of (n, workers), and every index is written by exactly one
// worker, so results cannot depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, int workers = 0) {
    if (workers <= 0) workers = default_workers();
    if (detail::g_serial_depth > 0) workers = 1;
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (nw <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t lo = n * w / nw;
        const std::size_t hi = n * (w + 1) / nw;
        pool.emplace_back([lo, hi, &fn]() {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace seisuno::threads
