#pragma once

#include <functional>

#include "analytic.hpp"
#include "execution.hpp"
#include "grid.hpp"

namespace breather {

using RealFunction = std::function<double(const Vec3&)>;

struct AdvectionOptions {
    double cfl = 0.4;
    /// A cell belongs to the support where |s| exceeds this fraction of max |s0|.
    double support_threshold = 1e-8;
    std::size_t boundary_cells = 5;
    Execution exec = Execution::parallel;
};

struct AdvectionReport {
    Vec3 velocity{};
    std::size_t steps = 0;
    double dt = 0.0;
    double l2_deviation = 0.0;    ///< RMS of s(x, T) - s0(x - v T) over the grid
    double linf_deviation = 0.0;
    double amplitude_initial = 0.0;
    double amplitude_final = 0.0;
    double amplitude_drift = 0.0;  ///< |max|s(T)| - max|s0|| / max|s0|
};

/// Linear perturbation s of the free action S0 = -E t + p.x obeys
/// s_t + (p/E).grad s = 0. Integrated with classical RK4 in time and
/// second-order central differences in space (zero outside the grid),
/// then compared with the exact translate s0(x - v T).
/// Throws InvalidInput when the support comes within boundary_cells of the
/// grid edge at t = 0 or t = T.
AdvectionReport advect_check(const PlaneWaveSpec& background, const RealFunction& s0, const Grid& spatial,
                             double t_final, const AdvectionOptions& options = {});

}  // namespace breather
