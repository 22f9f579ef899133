#pragma once

// Fork-join over an index range. Work items are claimed dynamically, so the
// caller must make each item's result independent of which worker runs it.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ajscc {

/// Worker threads to use: hardware concurrency, capped by AJSCC_THREADS.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("AJSCC_THREADS")) {
        unsigned cap = 0;
        const char* end = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, end, cap);
        if (ec == std::errc() && ptr == end && cap > 0) n = cap;
    }
    return n;
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers (0 = worker_count()).
/// The first exception thrown by any call is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned threads = 0) {
    if (count == 0) return;
    if (threads == 0) threads = worker_count();
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ajscc
