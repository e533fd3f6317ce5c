#ifndef BLQ_PARALLEL_HPP
#define BLQ_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace blq {

/// Worker-thread cap: the BLQ_THREADS environment variable when set to a
/// positive integer, otherwise the hardware concurrency. Read on every
/// call so tests can vary it within one process.
int worker_thread_cap();

/// Runs body(i) for i in [0, n) on up to worker_thread_cap() threads,
/// static contiguous chunks. Each index must write only its own outputs;
/// under that contract results are independent of the thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

} // namespace blq

#endif // BLQ_PARALLEL_HPP
