#pragma once
// Minimal fork-join helper.  Parallel regions in this library only ever do
// disjoint writes (independent grid rows/columns, independent particles),
// so results are bitwise identical for every worker count; reductions stay
// serial by design.  With workers <= 1 the body runs inline.

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace vfp {

class ThreadPool {
public:
    explicit ThreadPool(unsigned workers = 1)
        : workers_(workers == 0 ? 1 : workers) {}

    unsigned workers() const { return workers_; }

    /// Run body(lo, hi) over a partition of [0, n).  Blocks until done.
    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) const {
        if (n == 0) return;
        const std::size_t parts = std::min<std::size_t>(workers_, n);
        if (parts <= 1) {
            body(0, n);
            return;
        }
        std::vector<std::thread> threads;
        threads.reserve(parts - 1);
        const std::size_t chunk = (n + parts - 1) / parts;
        for (std::size_t t = 1; t < parts; ++t) {
            const std::size_t lo = t * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo < hi) threads.emplace_back(body, lo, hi);
        }
        body(0, std::min(n, chunk));
        for (auto& th : threads) th.join();
    }

private:
    unsigned workers_;
};

}  // namespace vfp
