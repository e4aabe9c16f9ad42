#pragma once

#include <functional>

namespace mfs {

// Global worker count used by parallel_for. Defaults to the hardware
// concurrency; the CLI exposes it as --threads.
void set_num_threads(int n);
int num_threads();

// Runs fn(i) for i in [begin, end). Chunked across worker threads.
// Results must be written to disjoint slots: there is no reduction and no
// ordering guarantee between iterations, which keeps output deterministic.
// Nested calls run serially in the calling thread.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace mfs
