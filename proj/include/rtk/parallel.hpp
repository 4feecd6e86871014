#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rtk {

/// Runs body(state, i) for i in [0, count) on up to `workers` threads. Each
/// thread builds its own state with make_state() (e.g. a classifier
/// connection). After the first exception no new items start; the exception
/// is rethrown once all threads have stopped.
template <typename MakeState, typename Body>
void parallel_for_each_index(std::size_t count, int workers, MakeState&& make_state, Body&& body) {
    const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                        std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto run = [&] {
        try {
            auto state = make_state();
            for (;;) {
                if (stop.load()) return;
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(state, i);
            }
        } catch (...) {
            stop.store(true);
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    if (threads == 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace rtk
