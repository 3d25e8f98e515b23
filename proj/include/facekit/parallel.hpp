#pragma once

// Minimal fork-join helper. Tasks are indexed and must write only to their
// own output slots; results are then scheduling-independent by construction.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace facekit {

// Effective worker count. `requested` 0 means auto (hardware concurrency).
// The FACEKIT_THREADS environment variable caps the result (0 = no cap).
inline int resolve_threads(int requested) {
    int threads = requested;
    if (threads <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw == 0 ? 1 : static_cast<int>(hw);
    }
    if (const char* env = std::getenv("FACEKIT_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0 && cap < threads) threads = cap;
    }
    return threads < 1 ? 1 : threads;
}

// Runs fn(0), ..., fn(count-1) on up to `threads` workers. Rethrows the
// first exception raised by any task after all workers have stopped.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const int workers =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);  // drain remaining work
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace facekit
