#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mincusum {

inline std::size_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Calls body(k) for every k in [0, count) on up to `workers` threads. Work is
/// handed out in chunks; callers write results by index, so the outcome does
/// not depend on scheduling. The first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body, std::size_t chunk = 64) {
    workers = std::max<std::size_t>(1, std::min(workers, (count + chunk - 1) / std::max<std::size_t>(1, chunk)));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (;;) {
                const std::size_t start = next.fetch_add(chunk);
                if (start >= count) return;
                const std::size_t stop = std::min(count, start + chunk);
                for (std::size_t k = start; k < stop; ++k) body(k);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(count);
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace mincusum
