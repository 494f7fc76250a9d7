#pragma once

#include <cstddef>
#include <functional>

namespace stlreach {

// Worker count used by grid sweeps and batched evaluation. Defaults to 1
// (fully sequential, reproducible timings); override with the
// STLREACH_THREADS environment variable. All parallel loops in this
// project write disjoint outputs, so results are bitwise identical for
// any worker count.
int thread_count();

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
// worker. With thread_count() == 1 this is a plain call.
void parallel_for_chunks(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)> &fn,
                         int workers = 0);

// Batched network evaluation writes disjoint per-point outputs, so it may
// use all hardware threads without affecting results.
int batch_eval_threads();

} // namespace stlreach
