#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mm {

// Execution mode for the data-parallel kernels. Serial runs the reference
// loop; Parallel distributes iterations over OpenMP threads. Every kernel
// produces bit-identical results in both modes and for any thread count:
// all random draws happen up front in a fixed order and all floating-point
// reductions are carried out in a fixed index order.
enum class ExecMode { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_max_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace mm
