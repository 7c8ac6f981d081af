#include "svi/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace svi {

unsigned worker_count()
{
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SVI_EPP_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) return std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mtx;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mtx);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace svi
