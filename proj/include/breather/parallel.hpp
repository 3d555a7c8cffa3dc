#pragma once

#include <cstddef>

namespace breather {

/// Caps the number of OpenMP workers used by the parallel kernels. n <= 0
/// restores the runtime default.
void set_workers(int n);
int workers();

/// Block size used by every deterministic reduction. Partial sums are formed
/// per block and combined in block order, so results do not depend on the
/// worker count.
inline constexpr std::size_t kReductionBlock = 4096;

}  // namespace breather
