#pragma once

#include <cstdint>
#include <array>
#include <functional>

#include "vec3.hpp"

namespace breather {

using ScalarPotential = std::function<double(const Vec3& x, double t)>;
using VectorPotential = std::function<Vec3(const Vec3& x, double t)>;

/// Axis-aligned box used for spot checks of a potential.
struct SampleBox {
    Vec3 lo{-50.0, -50.0, -50.0};
    Vec3 hi{50.0, 50.0, 50.0};
    double t_lo = 0.0;
    double t_hi = 50.0;
};

/// Slowly varying electromagnetic potentials (U, A) with coupling e.
///
/// Construction enforces the declared variation scale L >= 50 and spot-checks
/// it: at sampled points every second derivative of U and A times L^2 must
/// stay below 1 + |U|, i.e. the potential energy changes by at most about one
/// rest energy over a distance L. The Lorentz gauge dU/dt + div A = 0 must
/// hold to 1e-8 at the same points. Derivatives are fourth-order central
/// differences with step kDerivativeStep.
class EMPotential {
public:
    static constexpr double kMinScale = 50.0;
    static constexpr double kGaugeTolerance = 1e-8;
    static constexpr double kDerivativeStep = 1e-2;

    EMPotential(ScalarPotential U, VectorPotential A, double charge, double scale,
                const SampleBox& check_box = {}, int check_samples = 64, std::uint64_t seed = 1);

    /// U = 0, A = 0.
    static EMPotential none();
    /// Constant scalar potential.
    static EMPotential constant(double u0, double charge = 1.0);
    /// U = -g x (uniform force g along +x for e = 1).
    static EMPotential uniform_field(double g, double charge = 1.0);
    /// U = omega0^2 x^2 / 2 (oscillator along x).
    static EMPotential harmonic(double omega0, double charge = 1.0);

    double U(const Vec3& x, double t) const { return scalar_(x, t); }
    Vec3 A(const Vec3& x, double t) const { return vector_(x, t); }
    double charge() const { return charge_; }
    double scale() const { return scale_; }
    bool is_vacuum() const { return vacuum_; }

    Vec3 grad_U(const Vec3& x, double t) const;
    double dU_dt(const Vec3& x, double t) const;
    double div_A(const Vec3& x, double t) const;
    /// d A_j / d x_i, returned as rows i.
    std::array<Vec3, 3> grad_A(const Vec3& x, double t) const;

    /// |dU/dt + div A| at one point.
    double gauge_residual(const Vec3& x, double t) const;
    /// Largest gauge residual over `samples` uniformly drawn points of the box.
    double max_gauge_residual(const SampleBox& box, int samples, std::uint64_t seed) const;
    /// Largest value of L^2 |second derivative| / (1 + |U|) over the sample.
    double slow_variation_ratio(const SampleBox& box, int samples, std::uint64_t seed) const;

private:
    EMPotential() = default;

    ScalarPotential scalar_;
    VectorPotential vector_;
    double charge_ = 0.0;
    double scale_ = 0.0;
    bool vacuum_ = false;
};

}  // namespace breather
