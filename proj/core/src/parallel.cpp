#include "blq/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace blq {

int worker_thread_cap() {
    if (const char* env = std::getenv("BLQ_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<int>(v);
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    if (n <= 0) {
        return;
    }
    std::int64_t threads = std::min<std::int64_t>(worker_thread_cap(), n);
    if (threads <= 1) {
        for (std::int64_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    std::int64_t chunk = (n + threads - 1) / threads;
    for (std::int64_t t = 0; t < threads; ++t) {
        std::int64_t lo = t * chunk;
        std::int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) {
            break;
        }
        pool.emplace_back([lo, hi, &body] {
            for (std::int64_t i = lo; i < hi; ++i) {
                body(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace blq
