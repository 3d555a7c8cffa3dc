#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "action.hpp"
#include "analytic.hpp"
#include "em_potential.hpp"
#include "execution.hpp"
#include "grid.hpp"
#include "stencil.hpp"

namespace breather {

using Mat3 = std::array<Vec3, 3>;  // rows

/// Classical trajectory with its action and the first-order hbar correction
/// carried along it. Each quantity is stored with its time derivative so
/// that `at` can interpolate with cubic Hermite polynomials.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;  ///< dx/dt = p - e A
    std::vector<Vec3> momenta;     ///< canonical p = grad S_c
    std::vector<Vec3> forces;      ///< dp/dt
    std::vector<Complex> action;   ///< S_c along the path
    std::vector<double> lagrangian;  ///< dS_c/dt
    std::vector<Complex> sigma;    ///< S_sc - S_c along the path
    std::vector<double> laplacian;  ///< div grad S_c on the path
    std::vector<double> jacobian;  ///< det d x / d x0
    double hbar = 1.0;

    struct State {
        Vec3 x;
        Vec3 v;
        Vec3 p;
        Complex action;
        Complex sigma;
    };
    /// Interpolated state; throws InvalidInput outside [times.front(), times.back()].
    State at(double t) const;
    std::size_t size() const { return times.size(); }
};

struct TrajectoryOptions {
    /// Initial value of S_c; defaults to p0 . x0 when unset.
    std::optional<Complex> initial_action;
    /// Hessian of S_c at x0 (= d p / d x0 at t0); zero for a plane initial action.
    Mat3 initial_hessian{};
    double hbar = 1.0;
    /// Cap on |p0| for the nonrelativistic equations.
    double max_momentum = 0.1;
    /// When false only x, p and S_c are meaningful: sigma and the Laplacian
    /// stay zero and focusing of neighbouring rays is not an error. Useful for
    /// single orbits that pass through caustics of their family.
    bool transport_correction = true;
};

/// Fixed-step RK4 for dx/dt = p - e A, dp/dt = -e grad U + e (grad A).(dx/dt),
/// together with dS_c/dt = p.(dx/dt) - H, the tangent map d(x, p)/d x0 and
/// d sigma/dt = -i hbar lap S_c with lap S_c = tr(dp/dx0 (dx/dx0)^-1).
/// The last step is shortened to land on t1.
///
/// Throws InvalidInput if dt > L/100 or |p0| exceeds the cap, Error on a
/// non-finite potential value, CausticError when det(dx/dx0) changes sign
/// (unless transport_correction is off).
Trajectory integrate_trajectory(const EMPotential& pot, const Vec3& x0, const Vec3& p0, double t0, double t1,
                                double dt, const TrajectoryOptions& options = {});

/// Result of the grid transport of the hbar correction.
struct SemiclassicalField {
    ComplexField s_sc;
    /// 1 where the backward characteristic stayed inside the differentiable
    /// interior of the grid; elsewhere s_sc holds S_c unchanged.
    std::vector<std::uint8_t> valid;
};

/// S_sc = S_c + sigma with d sigma/dt = -i hbar lap S_c along the
/// characteristics dx/dt = grad S_c - e A of the sampled classical action.
/// sigma = 0 on the first time level. Characteristics are traced backwards
/// from every node with RK4 on the grid's time step, gradients taken with
/// the stencil and interpolated (cubic in t, multilinear in space).
/// Throws CausticError listing the nodes where the discrete Jacobian of the
/// foot-point map is not positive.
SemiclassicalField semiclassical_correction(const ComplexField& classical_action, const EMPotential& pot,
                                            const StencilSpec& stencil, double hbar = 1.0);

/// Slowly varying field form of the breather action:
/// S = -(1 + e U) t + e A.x - i Log{1 + alpha exp(-i t) j_0(sqrt(3) r)}
/// with U, A taken at the evaluation point. A nonzero boost_v moves the
/// breather: the regular part becomes -(E + e U) t + (p + e A).x and the
/// logarithm is evaluated in rest-frame coordinates.
ActionValue slowly_varying_breather_action(const EMPotential& pot, const BreatherSpec& spec,
                                           const SpacetimePoint& pt);

/// Uniform asymptotic (inner) action in the nonrelativistic limit:
/// S = -t + S_sc - i Log{1 + alpha exp(-i (1 + v^2/2) t) exp(i p.x) j_0(sqrt(3) |x - x_p(t)|)}
/// with S_sc = S_c(t) + p(t).(x - x_p(t)) + sigma(t) expanded about the
/// path and p, v taken locally in time from the trajectory.
/// Throws InvalidInput when |v| > 0.1 or |x - x_p| > 20.
ActionValue uniform_asymptotic_action(const EMPotential& pot, const Trajectory& traj, const BreatherSpec& spec,
                                      const SpacetimePoint& pt);

// Closed-form classical actions used by the experiments.

/// Plane family: S_c = p.x - p^2 t / 2 (vacuum).
double free_classical_action(const Vec3& p, const SpacetimePoint& pt);
/// Uniform force g along x (U = -g x, e = 1), initial S_c = p0 x:
/// S_c = (p0 + g t) x - ((p0 + g t)^3 - p0^3) / (6 g).
double uniform_field_classical_action(double g, double p0, const SpacetimePoint& pt);

}  // namespace breather
