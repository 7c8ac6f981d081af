// Deterministic worker pool: results must be written to preallocated
// per-index slots so thread count never affects output.
#pragma once

#include <cstddef>
#include <functional>

namespace svi {

// SVI_EPP_THREADS caps the worker count; unset or 0 means all cores.
unsigned worker_count();

// Executes fn(i) for i in [0, n) across workers (static block partition).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace svi
