#pragma once

#include <cstddef>
#include <functional>

namespace rxva {

// Work is split into fixed-size chunks whose boundaries depend only on the
// item count, never on the worker count. Callers that reduce per-chunk
// partials in chunk order therefore get bit-identical results for any
// number of threads.
inline constexpr std::size_t kChunkSize = 2048;

[[nodiscard]] std::size_t chunk_count(std::size_t n_items, std::size_t chunk = kChunkSize);

/// Runs body(chunk_index, begin, end) for every chunk. threads == 0 means
/// hardware concurrency.
void parallel_chunks(std::size_t n_items, unsigned threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     std::size_t chunk = kChunkSize);

/// Process-wide default used when a config does not pin a worker count.
void set_default_threads(unsigned threads);
[[nodiscard]] unsigned default_threads();

}  // namespace rxva
