#pragma once

#include <atomic>
#include <complex>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace poincare::parallel {

// Runs fn(i) for i in [0, n), results stored by index, so the outcome is
// byte-identical for any worker count.
template <typename T, typename Fn>
std::vector<T> map_indexed(std::size_t n, int workers, Fn&& fn) {
    std::vector<T> results(n);
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    int count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    for (int w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

// Pairwise tree reduction in fixed index order: the summation tree depends
// only on the length, never on thread scheduling.
template <typename T>
T tree_sum_range(const std::vector<T>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        T acc{};
        for (std::size_t i = lo; i < hi; ++i) acc += v[i];
        return acc;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return tree_sum_range(v, lo, mid) + tree_sum_range(v, mid, hi);
}

template <typename T>
T tree_sum(const std::vector<T>& v) {
    if (v.empty()) return T{};
    return tree_sum_range(v, 0, v.size());
}

} // namespace poincare::parallel
