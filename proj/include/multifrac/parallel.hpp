#pragma once

#include <cstddef>
#include <functional>

namespace multifrac {

/// Thread cap from MULTIFRAC_THREADS, defaulting to hardware concurrency.
unsigned max_threads();

/// Runs fn(i) for i in [0, n). Work is split by index; each index is
/// processed exactly once, so per-index results are thread-count invariant.
/// Reductions over the results must be done by the caller in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace multifrac
