#include "breather/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <sstream>

#include "breather/errors.hpp"
#include "breather/special_functions.hpp"

namespace breather {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

bool finite(const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

// exp(i theta) for real theta.
Complex cis(double theta) { return {std::cos(theta), std::sin(theta)}; }

}  // namespace

PlaneWaveSpec PlaneWaveSpec::on_shell(const Vec3& p) { return {std::sqrt(1.0 + dot(p, p)), p}; }

void PlaneWaveSpec::validate() const {
    if (!std::isfinite(energy) || !isfinite(momentum) || !(energy > 0.0)) {
        throw InvalidInput("PlaneWaveSpec: energy must be positive and finite");
    }
    const double shell = 1.0 + dot(momentum, momentum);
    if (std::abs(energy * energy - shell) > 1e-12 * shell) {
        throw InvalidInput("PlaneWaveSpec: off the mass shell E^2 = p^2 + 1");
    }
}

void BreatherSpec::validate() const {
    if (!finite(alpha)) throw InvalidInput("BreatherSpec: alpha must be finite");
    if (l < 0 || l > 8) throw InvalidInput("BreatherSpec: l must lie in 0..8");
    if (n < -l || n > l) throw InvalidInput("BreatherSpec: |n| must not exceed l");
    if (!isfinite(boost_v) || !(norm(boost_v) < 1.0)) throw InvalidInput("BreatherSpec: |boost_v| must be below 1");
    if (!isfinite(center)) throw InvalidInput("BreatherSpec: center must be finite");
}

ActionValue plane_wave_action(const PlaneWaveSpec& spec, const SpacetimePoint& pt) {
    spec.validate();
    return {Complex(-spec.energy * pt.t + dot(spec.momentum, pt.position()), 0.0), 0};
}

DispersionPair dispersion_omega(double k) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidInput("dispersion_omega: k must be finite and non-negative");
    return {std::sqrt(k * k + 1.0), k};
}

Vec3 group_velocity(const PlaneWaveSpec& spec) {
    spec.validate();
    return spec.momentum * (1.0 / spec.energy);
}

SpacetimePoint lorentz_boost(const SpacetimePoint& pt, const Vec3& v) {
    const double speed = norm(v);
    if (!(speed < 1.0)) throw InvalidInput("lorentz_boost: |v| must be below 1");
    if (speed == 0.0) return pt;
    const double gamma = 1.0 / std::sqrt((1.0 - speed) * (1.0 + speed));
    const Vec3 dir = v * (1.0 / speed);
    const Vec3 x = pt.position();
    const double x_par = dot(x, dir);
    const Vec3 x_perp = x - dir * x_par;
    const double t_new = gamma * (pt.t - speed * x_par);
    const double x_par_new = gamma * (x_par - speed * pt.t);
    return at(t_new, x_perp + dir * x_par_new);
}

SpacetimePoint rest_frame(const BreatherSpec& spec, const SpacetimePoint& pt) {
    return lorentz_boost(at(pt.t, pt.position() - spec.center), spec.boost_v);
}

Complex plane_term(const BreatherSpec& spec, const SpacetimePoint& pt) { return cis(-rest_frame(spec, pt).t); }

Complex breather_term(const BreatherSpec& spec, const SpacetimePoint& pt) {
    spec.validate();
    const SpacetimePoint rf = rest_frame(spec, pt);
    const Vec3 x = rf.position();
    const double r = norm(x);
    double radial = spherical_bessel(spec.l, kBreatherK * r);
    double phase = -kBreatherOmega * rf.t;
    if (spec.l > 0) {
        const double cos_theta = r > 0.0 ? std::clamp(x.z / r, -1.0, 1.0) : 1.0;
        radial *= assoc_legendre(spec.l, spec.n, cos_theta);
        if (spec.n != 0 && (x.x != 0.0 || x.y != 0.0)) phase += spec.n * std::atan2(x.y, x.x);
    }
    return spec.alpha * cis(phase) * radial;
}

Complex breather_psi(const BreatherSpec& spec, const SpacetimePoint& pt) {
    return plane_term(spec, pt) + breather_term(spec, pt);
}

Complex breather_psi_free(Complex alpha, const DispersionPair& dispersion, const SpacetimePoint& pt) {
    const double r = norm(pt.position());
    return cis(-pt.t) + alpha * cis(-dispersion.omega * pt.t) * spherical_bessel(0, dispersion.k * r);
}

int branch_of(Complex action_value) {
    const double principal = std::arg(std::exp(kI * action_value));
    return static_cast<int>(std::lround((action_value.real() - principal) / (2.0 * kPi)));
}

ActionValue breather_action(const BreatherSpec& spec, const SpacetimePoint& pt) {
    const double t_rest = rest_frame(spec, pt).t;
    const Complex ratio = breather_term(spec, pt) / plane_term(spec, pt);
    const Complex arg = 1.0 + ratio;
    if (arg == Complex(0.0, 0.0)) throw SingularPointError("breather_action: Psi vanishes");
    const Complex s = -t_rest - kI * std::log(arg);
    return {s, branch_of(s)};
}

ActionValue far_field_action(const BreatherSpec& spec, const SpacetimePoint& pt) {
    const SpacetimePoint rf = rest_frame(spec, pt);
    if (kBreatherK * norm(rf.position()) < 10.0) {
        throw InvalidInput("far_field_action: point inside the breather core (sqrt(3) r < 10)");
    }
    const Complex s = -rf.t - kI * (breather_term(spec, pt) / plane_term(spec, pt));
    return {s, branch_of(s)};
}

ActionValue continue_action(const ActionValue& previous, Complex prev_psi, Complex psi) {
    if (psi == Complex(0.0, 0.0)) throw SingularPointError("action_from_psi: Psi vanishes on the path");
    const double step = std::arg(psi / prev_psi);
    if (std::abs(step) >= kPi) {
        std::ostringstream os;
        os << "action_from_psi: phase step " << step << " between neighbours is not below pi";
        throw ResolutionError(os.str());
    }
    const double predicted = previous.value.real() + step;
    const double principal = std::arg(psi);
    const int branch = static_cast<int>(std::lround((predicted - principal) / (2.0 * kPi)));
    return {Complex(principal + 2.0 * kPi * branch, -std::log(std::abs(psi))), branch};
}

std::vector<ActionValue> action_from_psi(std::span<const Complex> psi_path) {
    std::vector<ActionValue> out;
    out.reserve(psi_path.size());
    for (std::size_t i = 0; i < psi_path.size(); ++i) {
        const Complex psi = psi_path[i];
        if (psi == Complex(0.0, 0.0)) {
            throw SingularPointError("action_from_psi: Psi vanishes at sample " + std::to_string(i));
        }
        if (i == 0) {
            out.push_back({Complex(std::arg(psi), -std::log(std::abs(psi))), 0});
        } else {
            out.push_back(continue_action(out.back(), psi_path[i - 1], psi));
        }
    }
    return out;
}

}  // namespace breather
