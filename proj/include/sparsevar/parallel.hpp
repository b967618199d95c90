#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sparsevar {

/// Worker count from SPARSEVAR_THREADS if set and positive, otherwise `fallback`.
inline int resolve_workers(int fallback) {
    if (const char* env = std::getenv("SPARSEVAR_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    return std::max(1, fallback);
}

/// Runs body(i) for i in [0, count) on `workers` threads. Items are claimed
/// dynamically; callers write results into slot i so output never depends on
/// scheduling. The first exception thrown by any item is rethrown.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
    const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
    if (n_threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::min(n_threads, count));
    for (std::size_t t = 0; t < std::min(n_threads, count); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace sparsevar
