#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace trimer1d {

namespace detail {
inline std::atomic<int>& thread_setting() {
    static std::atomic<int> n{1};
    return n;
}
} // namespace detail

/// Worker count used by parallel_for. Values < 1 select hardware concurrency.
inline void set_num_threads(int n) {
    if (n < 1) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    detail::thread_setting().store(n);
}

inline int num_threads() { return detail::thread_setting().load(); }

/// Calls fn(i) for i in [begin, end). Static block partition, so the
/// assignment of indices to workers is deterministic. The first exception
/// thrown by any worker is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end, Fn&& fn) {
    const std::ptrdiff_t n = end - begin;
    if (n <= 0) return;
    const int workers = static_cast<int>(std::min<std::ptrdiff_t>(num_threads(), n));
    if (workers <= 1) {
        for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        const std::ptrdiff_t lo = begin + n * t / workers;
        const std::ptrdiff_t hi = begin + n * (t + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::ptrdiff_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace trimer1d
