#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace gdlnn {

inline int effective_jobs(int jobs) {
    if (jobs > 0) return jobs;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Each index is
// processed exactly once; fn must only write to per-index state, so results
// are identical for any job count. If several calls throw, the exception
// from the smallest index is rethrown.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    jobs = std::min(effective_jobs(jobs), count);
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                    failed.store(true);
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (failed.load()) {
        for (int i = 0; i < count; ++i) {
            if (errors[i]) std::rethrow_exception(errors[i]);
        }
    }
}

}  // namespace gdlnn
