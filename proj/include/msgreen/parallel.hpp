#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace msgreen {

/// Global worker cap, set by the CLI --jobs flag; 0 means hardware default.
int& worker_cap();

/// fn(i) for i in [0, count), chunked over worker threads. Results must be
/// written to preallocated per-index storage by the caller; reductions happen
/// afterwards in index order so outputs do not depend on the job count.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn);

}  // namespace msgreen
