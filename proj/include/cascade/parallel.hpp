#pragma once

// Minimal fork-join loop. Each index writes its own output slot, so results
// do not depend on the schedule. CASCADE_THREADS caps the worker count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cascade {

[[nodiscard]] inline unsigned max_threads() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CASCADE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) hw = std::min(hw, static_cast<unsigned>(v));
        } catch (...) {
            // ignore malformed values
        }
    }
    return hw;
}

/// Calls f(i) for i in [0, n). Exceptions from workers are rethrown (first one wins).
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t min_chunk = 64) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(max_threads(), (n + min_chunk - 1) / std::max<std::size_t>(1, min_chunk)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto body = [&] {
        try {
            for (;;) {
                const std::size_t start = next.fetch_add(min_chunk);
                if (start >= n) break;
                const std::size_t stop = std::min(n, start + min_chunk);
                for (std::size_t i = start; i < stop; ++i) f(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
            next.store(n);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace cascade
