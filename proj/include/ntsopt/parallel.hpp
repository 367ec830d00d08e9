#pragma once

#include <cstddef>
#include <functional>

namespace ntsopt {

// Runs body(i) for i in [0, count) on up to `threads` workers (0 -> hardware
// concurrency). Work is split by index, so results written to slot i are
// identical regardless of scheduling. Exceptions from workers are rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace ntsopt
