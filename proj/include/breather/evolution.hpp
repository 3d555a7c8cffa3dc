#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "execution.hpp"
#include "grid.hpp"

namespace breather {

/// Two consecutive leapfrog time levels on one spatial grid.
struct EvolutionState {
    ComplexField psi_now;
    ComplexField psi_prev;
    double time = 0.0;  ///< time of psi_now
    double dt = 0.0;    ///< negative when running backwards
};

enum class Boundary { analytic_dirichlet, periodic };

/// Default CFL factor for automatic step selection in 3D.
inline constexpr double kDefaultCfl = 0.5 / std::numbers::sqrt3;

/// State initialised from an exact solution at t0 - dt and t0.
EvolutionState exact_state(const PointFunction& exact, const Grid& spatial, double t0, double dt,
                           Execution exec = Execution::parallel);

/// Same levels with their order swapped, so further steps run backwards in time.
EvolutionState reversed(EvolutionState state);

/// Largest stable |dt| of the leapfrog scheme for unit mass on this grid.
double max_stable_dt(const Grid& spatial);

struct ProbeSample {
    double t = 0.0;
    Complex psi{};
    double localization_ratio = 0.0;
};

struct EvolveOptions {
    Boundary boundary = Boundary::periodic;
    /// Boundary values for analytic_dirichlet; required in that mode.
    PointFunction reference;
    /// Probed grid point (nearest node). Empty means no probe output.
    std::vector<Vec3> probes;
    std::size_t probe_every = 1;
    /// Regular part subtracted before measuring localization. When empty the
    /// localization column is zero.
    PointFunction background;
    double localization_radius = 0.0;
    Execution exec = Execution::parallel;
};

struct EvolveResult {
    EvolutionState state;
    /// One series per probe, samples every probe_every steps (including step 0).
    std::vector<std::vector<ProbeSample>> probes;
};

/// Second-order leapfrog for box Psi + Psi = 0 with the 2nd-order Laplacian:
///   Psi^{n+1} = 2 Psi^n - Psi^{n-1} + dt^2 (lap Psi^n - Psi^n).
/// Throws InvalidInput when |dt| exceeds max_stable_dt, DivergenceError
/// naming the step when a non-finite value appears.
EvolveResult kg_evolve(EvolutionState initial, std::size_t steps, const EvolveOptions& options);

/// Conserved leapfrog energy ||Psi^{n} - Psi^{n-1}||^2 / dt^2 + Re <Psi^{n}, (1 - lap) Psi^{n-1}>
/// for periodic boundaries, times the cell volume.
double discrete_energy(const EvolutionState& state);

/// Envelope |Psi - background| maximum outside the ball of `radius` about
/// its argmax, divided by the overall maximum. Zero when there is no
/// excitation. Throws InvalidInput when radius is under two grid cells.
double localization_metric(const ComplexField& field, std::span<const Complex> background, double radius);

/// Position of the envelope maximum, refined per axis by a three-point parabola.
Vec3 envelope_center(const ComplexField& field, std::span<const Complex> background);

/// background(grid.point(i)) for every sample of a spatial field.
std::vector<Complex> sample_background(const Grid& grid, const PointFunction& background);

/// ||field - exact|| / ||exact|| over all samples, exact evaluated at the field's time.
double relative_l2_error(const ComplexField& field, const PointFunction& exact,
                         Execution exec = Execution::parallel);

}  // namespace breather
