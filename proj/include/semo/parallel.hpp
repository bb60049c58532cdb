#pragma once

namespace semo {

/// Worker count used by the OpenMP kernels. n <= 0 selects the runtime default.
void set_threads(int n);
int thread_count();

}  // namespace semo
