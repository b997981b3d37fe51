#pragma once

// Deterministic fork/join helper. Work is cut into fixed-size chunks whose
// boundaries depend only on the problem size, each chunk writes into its own
// slot, and callers reduce the slots in chunk order. Results are therefore
// bit-identical for any thread count.

#include <cstddef>
#include <functional>

namespace transmod {

// Global worker cap (1 = serial). Set from --threads / TRANSMOD_THREADS.
void set_max_threads(int n);
int max_threads();

// Invokes fn(chunk_index, begin, end) for every chunk of at most chunk_size
// items. Chunks may run on any thread; nested calls run serially.
void parallel_chunks(std::size_t n_items, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

std::size_t chunk_count(std::size_t n_items, std::size_t chunk_size);

}  // namespace transmod
