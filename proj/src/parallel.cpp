#include "subgauss/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace subgauss {

void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
    if (count <= 0) return;
    threads = std::max(1, threads);
    if (threads == 1 || count < 2) {
        body(0, count);
        return;
    }
    const std::int64_t chunk = (count + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        const std::int64_t begin = t * chunk;
        const std::int64_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace subgauss
