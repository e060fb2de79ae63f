#ifndef OCEANPROV_DETAIL_PARALLEL_HPP
#define OCEANPROV_DETAIL_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace oceanprov::detail {

// Runs fn(i) for i in [0, n). Each task writes only to its own output slot,
// so results are identical regardless of the number of workers.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_threads = 0) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (max_threads != 0 && max_threads < hw) hw = max_threads;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}

#endif
