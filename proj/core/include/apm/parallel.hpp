#pragma once

#include <functional>

namespace apm {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write results by index, so output never
/// depends on scheduling. The first exception thrown is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace apm
