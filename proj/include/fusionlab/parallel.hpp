#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fusionlab {

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written by index; the first captured exception (lowest index) is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < t; ++k)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace fusionlab
