#pragma once

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace groupsift {

/// Every batch kernel comes in two flavors: a plain serial loop kept as the
/// reference implementation, and an OpenMP version. Kernels are structured as
/// pure maps into preallocated slots, so both modes produce bit-identical
/// results and the choice is performance-only.
enum class ExecMode { serial, parallel };

namespace util {

template <class Fn>
void parallel_for(std::size_t n, ExecMode mode, Fn&& fn) {
#ifdef _OPENMP
    if (mode == ExecMode::parallel) {
        #pragma omp parallel for schedule(dynamic, 32)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

} // namespace util
} // namespace groupsift
