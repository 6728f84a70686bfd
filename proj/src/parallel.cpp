#include "rxva/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rxva {

namespace {
std::atomic<unsigned> g_default_threads{0};
}

std::size_t chunk_count(std::size_t n_items, std::size_t chunk) {
    return (n_items + chunk - 1) / chunk;
}

void set_default_threads(unsigned threads) { g_default_threads = threads; }

unsigned default_threads() {
    const unsigned t = g_default_threads.load();
    if (t != 0) return t;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t n_items, unsigned threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     std::size_t chunk) {
    const std::size_t n_chunks = chunk_count(n_items, chunk);
    if (n_chunks == 0) return;
    if (threads == 0) threads = default_threads();
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));

    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = c * chunk;
        body(c, begin, std::min(n_items, begin + chunk));
    };

    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < n_chunks; c = next++) {
                try {
                    run_chunk(c);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace rxva
