#pragma once
// Ordered parallel map over a corpus: results land in input order regardless
// of the job count, so outputs are byte-identical for any --jobs value.

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace kgsum {

// fn(index) -> R; results[i] corresponds to input i. The lowest-index
// exception is rethrown after all workers join.
template <typename R>
std::vector<R> parallel_map(size_t count, int jobs, const std::function<R(size_t)>& fn) {
    std::vector<R> results(count);
    if (count == 0) return results;
    if (jobs < 1) jobs = 1;
    const size_t workers = std::min<size_t>(static_cast<size_t>(jobs), count);
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    results[i] = fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (size_t i = 0; i < count; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
    }
    return results;
}

}  // namespace kgsum
