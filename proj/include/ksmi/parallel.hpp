#pragma once

#include <cstddef>
#include <functional>

namespace ksmi {

// Runs body(0..count-1) on up to `threads` workers (0 means hardware
// concurrency). Each index runs exactly once; callers write results into
// index-addressed slots so the outcome does not depend on scheduling.
// If any body throws, the exception from the lowest failing index is
// rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace ksmi
