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

namespace levymp {

// Worker count from LEVY_MP_THREADS, else the hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("LEVY_MP_THREADS")) {
        try {
            long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Calls fn(i) for i in [0, n).  Each index must write only to its own slot;
// results then do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = 0) {
    if (workers == 0) workers = worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// Fixed-order pairwise reduction: the combination tree depends only on the
// number of items.
template <class T, class Combine>
T pairwise_reduce(std::vector<T> items, Combine&& combine) {
    if (items.empty()) return T{};
    while (items.size() > 1) {
        std::vector<T> next;
        next.reserve((items.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < items.size(); i += 2) next.push_back(combine(items[i], items[i + 1]));
        if (items.size() % 2 == 1) next.push_back(items.back());
        items = std::move(next);
    }
    return items.front();
}

}  // namespace levymp
