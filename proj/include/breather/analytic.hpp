#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "action.hpp"
#include "grid.hpp"
#include "vec3.hpp"

namespace breather {

/// Breather wavenumber and frequency fixed by the rest-clock condition:
/// omega = 2 mc^2/hbar, hence k = sqrt(3) mc/hbar.
inline constexpr double kBreatherK = std::numbers::sqrt3;
inline constexpr double kBreatherOmega = 2.0;

/// Free-particle plane wave with energy E and momentum p (internal units).
struct PlaneWaveSpec {
    double energy = 1.0;
    Vec3 momentum{};

    /// Energy placed on the mass shell E = sqrt(1 + p^2).
    static PlaneWaveSpec on_shell(const Vec3& p);
    /// Throws InvalidInput unless E^2 = p^2 + 1 to relative 1e-12 and E > 0.
    void validate() const;
};

/// Parameters of one breather term. l = n = 0 is the spherically symmetric
/// standing breather; boost_v moves it, center shifts it at t = 0.
struct BreatherSpec {
    Complex alpha{0.0, 0.0};
    int l = 0;
    int n = 0;
    Vec3 boost_v{};
    Vec3 center{};

    void validate() const;
};

struct DispersionPair {
    double omega;
    double k;
};

/// S = -E t + p.x on the principal branch.
ActionValue plane_wave_action(const PlaneWaveSpec& spec, const SpacetimePoint& pt);

/// omega = sqrt(k^2 + 1); throws InvalidInput for k < 0.
DispersionPair dispersion_omega(double k);

/// v = p / E.
Vec3 group_velocity(const PlaneWaveSpec& spec);

/// Lorentz transformation into the frame moving with velocity v:
/// t' = gamma (t - v.x), x'_par = gamma (x_par - |v| t), x'_perp = x_perp.
SpacetimePoint lorentz_boost(const SpacetimePoint& pt, const Vec3& v);

/// Lab point -> breather rest-frame point (translate by center, then boost).
SpacetimePoint rest_frame(const BreatherSpec& spec, const SpacetimePoint& pt);

/// exp(-i t') : the regular (plane) part of the breather solution.
Complex plane_term(const BreatherSpec& spec, const SpacetimePoint& pt);

/// alpha exp(-2 i t' + i n phi') j_l(sqrt(3) r') P_l^n(cos theta').
Complex breather_term(const BreatherSpec& spec, const SpacetimePoint& pt);

/// Psi = plane_term + breather_term. Frequency and wavenumber are locked.
Complex breather_psi(const BreatherSpec& spec, const SpacetimePoint& pt);

/// Unlocked spherically symmetric form exp(-i t) + alpha exp(-i omega t) j_0(k r),
/// used to probe the dispersion relation. Off the shell it is not a solution.
Complex breather_psi_free(Complex alpha, const DispersionPair& dispersion, const SpacetimePoint& pt);

/// S = -t' - i Log(1 + breather_term / plane_term). The logarithm stays on
/// its principal sheet, which is continuous whenever |alpha j_l P_l^n| < 1.
ActionValue breather_action(const BreatherSpec& spec, const SpacetimePoint& pt);

/// Leading far-field form S = -t' - i (breather_term / plane_term).
/// Throws InvalidInput when sqrt(3) r' < 10.
ActionValue far_field_action(const BreatherSpec& spec, const SpacetimePoint& pt);

/// Branch-tracked S = -i ln(Psi) along a path. The first sample sits on the
/// principal branch; each later sample takes the branch nearest to its
/// predecessor. Throws SingularPointError at Psi = 0 and ResolutionError when
/// neighbouring samples differ in phase by pi or more.
std::vector<ActionValue> action_from_psi(std::span<const Complex> psi_path);

/// Continues a single sample from a known previous action value.
ActionValue continue_action(const ActionValue& previous, Complex prev_psi, Complex psi);

/// Branch index of a given action value relative to the principal logarithm of exp(i S).
int branch_of(Complex action_value);

}  // namespace breather
