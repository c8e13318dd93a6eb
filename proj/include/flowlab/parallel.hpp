#pragma once

#include <cstddef>
#include <functional>

namespace flowlab {

// Runs fn(i) for i in [0, n).  Partitions the index range into contiguous
// chunks over std::thread when more than one hardware thread is available,
// otherwise runs serially.  Callers write to disjoint per-index slots, so the
// result is identical under any schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace flowlab
