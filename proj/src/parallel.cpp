#include "msgreen/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>

namespace msgreen {

int& worker_cap() {
    static int cap = 0;
    return cap;
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn) {
    int jobs = worker_cap() > 0 ? worker_cap()
                                : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max<int>(1, static_cast<int>(std::min<std::int64_t>(jobs, count)));
    if (jobs == 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&]() {
            try {
                for (std::int64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace msgreen
