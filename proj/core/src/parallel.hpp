#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sro::detail {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Work is handed
/// out through a shared counter; callers write results by index so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t count, int jobs, Body&& body) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::mutex mutex;
    std::size_t next = 0;
    std::exception_ptr error;
    auto run = [&] {
        while (true) {
            std::size_t i;
            {
                std::lock_guard lock(mutex);
                if (next >= count || error) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(workers, count); ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace sro::detail
