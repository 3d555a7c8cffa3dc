#include "breather/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace breather {

namespace {
#ifdef _OPENMP
const int kDefaultWorkers = omp_get_max_threads();
#endif
}  // namespace

void set_workers(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n > 0 ? n : kDefaultWorkers);
#else
    (void)n;
#endif
}

int workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace breather
