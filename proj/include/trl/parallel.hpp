#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace trl {

/// Worker count: TRL_THREADS if set, else hardware concurrency.
unsigned worker_count();

namespace detail {
/// Set inside worker threads; nested parallel_for calls then run serially.
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Indices are
/// handed out in contiguous blocks; callers write into per-index slots so the
/// result never depends on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const unsigned workers = detail::in_parallel_region ? 1u : std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            detail::in_parallel_region = true;
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace trl
