#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qpmseg {

/// Runs fn(0..n-1) on up to `workers` threads. Work items are claimed from a
/// shared counter; callers own determinism by writing results into per-index
/// slots. The first exception thrown by any item is rethrown after all
/// threads join.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers < 1) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto drain = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

} // namespace qpmseg
