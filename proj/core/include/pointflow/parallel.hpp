#pragma once

#include <functional>

namespace pointflow {

/// Worker cap from the PF_THREADS environment variable (default 1; invalid
/// or non-positive values fall back to 1).
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; callers write results to per-index slots so the outcome
/// does not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace pointflow
