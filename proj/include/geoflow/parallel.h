/// @file parallel.h
/// @brief Deterministic chunked map-reduce over batch work.
///
/// Work is always split into a fixed number of chunks and merged in chunk
/// order, so results are bitwise identical for the serial path and for any
/// OpenMP thread count. Exceptions thrown inside a chunk are captured and
/// rethrown (lowest chunk index first) after the join.
#pragma once

#include <exception>
#include <utility>
#include <vector>

namespace geoflow {

/// Fixed chunk count; independent of omp_get_max_threads by design.
constexpr int kChunks = 16;

struct ChunkRange {
    int begin = 0;
    int end = 0;
};

/// Balanced [begin,end) slice of n items for chunk c of n_chunks.
inline ChunkRange chunk_range(int n, int c, int n_chunks = kChunks) {
    int base = n / n_chunks;
    int rem = n % n_chunks;
    int begin = c * base + (c < rem ? c : rem);
    int len = base + (c < rem ? 1 : 0);
    return {begin, begin + len};
}

/// Runs fn(c) for c in [0,n_chunks), in parallel when requested.
template <typename Fn>
void run_chunks(bool parallel, int n_chunks, Fn&& fn) {
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n_chunks));
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int c = 0; c < n_chunks; ++c) {
            try {
                fn(c);
            } catch (...) {
                errors[static_cast<size_t>(c)] = std::current_exception();
            }
        }
    } else {
        for (int c = 0; c < n_chunks; ++c) {
            try {
                fn(c);
            } catch (...) {
                errors[static_cast<size_t>(c)] = std::current_exception();
            }
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace geoflow
