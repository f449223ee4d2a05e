#pragma once

#include <cstddef>

namespace imlab {

/// Execution policy for node sweeps. Both produce identical results; the
/// serial path is the reference used by tests and the benchmark.
enum class Exec { Serial, Parallel };

/// Calls fn(i) for i in [0, n). Each index must write only its own slot.
template <class Fn>
void parallel_for(std::ptrdiff_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

}  // namespace imlab
