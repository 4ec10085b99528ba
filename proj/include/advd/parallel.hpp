#pragma once

#include <cstddef>
#include <functional>

namespace advd {

/// Number of worker threads: ADVD_THREADS env override, else hardware count.
std::size_t worker_count();

/// Fixed chunk count for data-parallel reductions. Keeping this constant
/// (rather than tied to the worker count) makes reduction order, and hence
/// every floating-point result, independent of the machine's thread count.
inline constexpr std::size_t kReductionChunks = 8;

/// Runs fn(chunk_index, begin, end) over [0,n) split into `chunks` contiguous
/// ranges. Chunks may run on any worker; callers reduce per-chunk results in
/// chunk order.
void parallel_chunks(std::size_t n, std::size_t chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Runs fn(i) for every i in [0,n); items must be independent and write only
/// to their own slots.
void parallel_items(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace advd
