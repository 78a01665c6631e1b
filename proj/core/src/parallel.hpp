#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace uitf::detail {

/// 0 means "ask the hardware"; anything else is taken literally.
inline std::size_t resolve_workers(std::size_t requested) {
    if (requested != 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<std::size_t>(hw);
}

/// Workers that parallel_tasks will actually start for a task count.
inline std::size_t clamp_workers(std::size_t requested, std::size_t tasks) {
    return std::max<std::size_t>(1, std::min(resolve_workers(requested), std::max<std::size_t>(tasks, 1)));
}

/// Runs body(task_index, worker_index) for every task in [0, tasks).
/// Worker indices are dense in [0, workers); index 0 is the calling thread.
/// Tasks are handed out dynamically, so the mapping of tasks to workers is
/// not deterministic; bodies must be independent. The first exception thrown
/// by any body is rethrown on the calling thread after all workers finish.
template <typename Body>
void parallel_tasks(std::size_t tasks, std::size_t workers, Body&& body) {
    workers = clamp_workers(workers, tasks);
    if (workers <= 1) {
        for (std::size_t i = 0; i < tasks; ++i) {
            body(i, std::size_t{0});
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&](std::size_t worker) {
        try {
            for (std::size_t i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) {
                body(i, worker);
            }
        } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) {
                error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(run, w);
    }
    run(0);
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace uitf::detail
