#include "biomark/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace biomark {

namespace {
std::atomic<int> g_workers{0};  // 0 = use hardware concurrency
}

int worker_count() {
    int n = g_workers.load();
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    return n;
}

void set_worker_count(int n) { g_workers.store(n); }

void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = static_cast<std::size_t>(worker_count());
    if (workers <= 1 || n == 1) {
        fn(0, n);
        return;
    }
    const std::size_t parts = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(parts);
    const std::size_t base = n / parts;
    const std::size_t extra = n % parts;
    std::size_t begin = 0;
    for (std::size_t p = 0; p < parts; ++p) {
        const std::size_t len = base + (p < extra ? 1 : 0);
        pool.emplace_back(fn, begin, begin + len);
        begin += len;
    }
    for (auto& t : pool) t.join();
}

}  // namespace biomark
