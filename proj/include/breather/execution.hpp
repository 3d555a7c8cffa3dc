#pragma once

namespace breather {

/// Selects the OpenMP kernels or the serial reference loops. Both produce
/// bitwise-identical results.
enum class Execution { parallel, serial };

}  // namespace breather
