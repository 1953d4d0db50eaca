#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vmfexp {

/// fn(i) for i in [0, count) on up to `workers` threads; results come back in index
/// order, so anything derived from them does not depend on the thread count.
/// The first exception thrown by fn is rethrown after all threads stop.
template <class T, class Fn>
std::vector<T> parallel_map(std::uint64_t count, unsigned workers, Fn fn) {
    std::vector<T> results(count);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
    };
    const auto threads = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), count));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace vmfexp
