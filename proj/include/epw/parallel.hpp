#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace epw {

/// Worker count: EPW_THREADS if set, else the hardware concurrency.
inline unsigned default_threads() {
    if (const char* env = std::getenv("EPW_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = fn(in[i]) on up to `threads` workers. Results land by index, so the
/// output does not depend on scheduling. The first exception is rethrown.
template <class T, class F>
auto parallel_map(const std::vector<T>& in, F&& fn, unsigned threads = 0) {
    using R = decltype(fn(in.front()));
    std::vector<R> out(in.size());
    if (in.empty()) return out;
    if (threads == 0) threads = default_threads();
    threads = std::min<unsigned>(threads, static_cast<unsigned>(in.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(in.size());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < in.size(); i = next++) {
                try {
                    out[i] = fn(in[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace epw
