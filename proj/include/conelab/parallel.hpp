#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace conelab {

// Runs fn(begin, end) over disjoint index blocks. Each block writes only
// its own output slots, so the result is independent of the worker count.
template <class Fn>
void parallel_blocks(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2048) {
        fn(static_cast<std::size_t>(0), n);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace conelab
