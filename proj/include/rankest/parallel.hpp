#pragma once

// Minimal fork-join helper. Work item i writes only to slot i, so results and
// any reductions done afterwards are independent of the worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace rankest {

/// Explicit request, else RANKEST_THREADS, else hardware concurrency.
std::size_t resolve_threads(std::optional<std::size_t> requested = std::nullopt);

/// Runs body(i) for every i in [0, count) on up to `threads` workers. If any
/// calls throw, the exception of the lowest failing index is rethrown after
/// all items have run.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) run(i);
        };
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace rankest
