#pragma once

#include <cstdint>
#include <functional>

namespace smoothent {

/// Process-wide worker count for parallel loops. Results are contractually
/// identical for any value; this only trades wall time.
int max_threads();
void set_max_threads(int n);

/// Runs fn(begin, end) over a static contiguous partition of [0, n).
/// Each index must be written independently; reductions happen afterwards in
/// index order so the outcome does not depend on the partition.
void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace smoothent
