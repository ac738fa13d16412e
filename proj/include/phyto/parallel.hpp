#pragma once

#include <cstddef>
#include <functional>

namespace phyto {

/// Runs body(i) for i in [0, n). Each index is executed exactly once; callers
/// write results to slot i so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Worker count used by parallel_for (PHYTO_THREADS overrides hardware_concurrency).
std::size_t worker_count();

}  // namespace phyto
