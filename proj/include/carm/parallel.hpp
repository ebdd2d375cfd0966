#pragma once

#include <future>
#include <thread>
#include <vector>

namespace carm {

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Run f(chunk_index) for chunk_index in [0, n_chunks), at most `workers` at a
// time, and return results in chunk order. Output is independent of the
// worker count; every parallel path in the library funnels through here.
template <class F>
auto parallel_chunks(size_t n_chunks, unsigned workers, F&& f)
    -> std::vector<decltype(f(size_t{0}))> {
    using R = decltype(f(size_t{0}));
    workers = resolve_workers(workers);
    std::vector<R> results(n_chunks);
    if (workers <= 1 || n_chunks <= 1) {
        for (size_t i = 0; i < n_chunks; ++i) results[i] = f(i);
        return results;
    }
    for (size_t base = 0; base < n_chunks; base += workers) {
        size_t wave = std::min<size_t>(workers, n_chunks - base);
        std::vector<std::future<R>> futs;
        futs.reserve(wave);
        for (size_t i = 0; i < wave; ++i)
            futs.push_back(std::async(std::launch::async, f, base + i));
        for (size_t i = 0; i < wave; ++i) results[base + i] = futs[i].get();
    }
    return results;
}

}  // namespace carm
