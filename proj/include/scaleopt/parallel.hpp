#pragma once

#include <cstddef>
#include <functional>

namespace scaleopt {

/// Number of points per accumulation chunk. Fixed so that reductions are
/// independent of the thread count: partial sums are always formed over the
/// same index ranges and combined in chunk order.
inline constexpr std::size_t kChunkSize = 256;

/// Caps library parallelism. n <= 0 resets to the SCALE_OPT_THREADS
/// environment variable, or 1 when unset.
void set_num_threads(int n);
int num_threads();

/// Runs fn(chunk_index, begin, end) for every chunk of [0, n). Chunks may
/// execute on any thread; callers must write results into per-chunk slots
/// and reduce sequentially.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace scaleopt
