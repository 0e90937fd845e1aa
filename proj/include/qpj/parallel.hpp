#pragma once

#include <cstddef>
#include <functional>

namespace qpj {

// Worker count used by grid sweeps. 0 means hardware concurrency; the QPJ_WORKERS
// environment variable overrides whatever was set here.
void set_worker_count(std::size_t workers);
std::size_t worker_count();

// Runs body(i) for i in [0, count). Results must be written to per-index slots;
// reductions happen afterwards in index order so output does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace qpj
