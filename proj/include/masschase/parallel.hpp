#pragma once

#include <cstddef>
#include <functional>

namespace masschase {

/// Worker count honoring MASSCHASE_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index must be independent of the others;
/// results are then identical to a serial loop regardless of the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace masschase
