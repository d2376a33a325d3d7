#include "cfgsim/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cfgsim {

std::size_t thread_count() {
    std::size_t n = 0;
    if (const char *env = std::getenv("GRADER_THREADS")) {
        try {
            n = static_cast<std::size_t>(std::stoul(env));
        } catch (const std::exception &) {
            n = 0;
        }
    }
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)> &fn) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back(worker);
    pool.clear();
    if (error)
        std::rethrow_exception(error);
}

} // namespace cfgsim
