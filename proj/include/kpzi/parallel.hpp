#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kpzi {

/// Runs body(i) for i in [0, n) on up to hardware_concurrency threads.
/// Each index writes its own slot, so results do not depend on scheduling.
/// The first exception thrown is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned max_threads = 0) {
    unsigned t = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
    t = unsigned(std::min<std::size_t>(t, n));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < t; ++k) {
        pool.emplace_back([&, k] {
            for (std::size_t i = k; i < n; i += t) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace kpzi
