#include "breather/em_potential.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "breather/errors.hpp"

namespace breather {

namespace {

constexpr double kH = EMPotential::kDerivativeStep;

// Fourth-order central first and second derivatives of g along a step.
template <class F>
double d1(F&& g) {
    return (g(-2.0 * kH) - 8.0 * g(-kH) + 8.0 * g(kH) - g(2.0 * kH)) / (12.0 * kH);
}

template <class F>
double d2(F&& g) {
    return (-g(-2.0 * kH) + 16.0 * g(-kH) - 30.0 * g(0.0) + 16.0 * g(kH) - g(2.0 * kH)) / (12.0 * kH * kH);
}

double component(const Vec3& v, int i) { return i == 0 ? v.x : (i == 1 ? v.y : v.z); }

Vec3 unit(int i) { return {i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0, i == 2 ? 1.0 : 0.0}; }

struct Sampler {
    std::mt19937_64 rng;
    const SampleBox& box;

    std::pair<Vec3, double> next() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const Vec3 x{box.lo.x + u(rng) * (box.hi.x - box.lo.x), box.lo.y + u(rng) * (box.hi.y - box.lo.y),
                     box.lo.z + u(rng) * (box.hi.z - box.lo.z)};
        return {x, box.t_lo + u(rng) * (box.t_hi - box.t_lo)};
    }
};

}  // namespace

EMPotential::EMPotential(ScalarPotential U, VectorPotential A, double charge, double scale,
                         const SampleBox& check_box, int check_samples, std::uint64_t seed)
    : scalar_(std::move(U)), vector_(std::move(A)), charge_(charge), scale_(scale) {
    if (!scalar_ || !vector_) throw InvalidInput("EMPotential: U and A callables are required");
    if (!std::isfinite(charge_)) throw InvalidInput("EMPotential: charge must be finite");
    if (!(scale_ >= kMinScale)) {
        std::ostringstream os;
        os << "EMPotential: declared variation scale " << scale_ << " is below " << kMinScale;
        throw InvalidInput(os.str());
    }
    const double gauge = max_gauge_residual(check_box, check_samples, seed);
    if (!(gauge <= kGaugeTolerance)) {
        std::ostringstream os;
        os << "EMPotential: Lorentz gauge violated, |dU/dt + div A| = " << gauge;
        throw InvalidInput(os.str());
    }
    const double slow = slow_variation_ratio(check_box, check_samples, seed + 1);
    if (!(slow <= 1.0)) {
        std::ostringstream os;
        os << "EMPotential: potential varies faster than the declared scale (ratio " << slow << ")";
        throw InvalidInput(os.str());
    }
}

EMPotential EMPotential::none() {
    EMPotential p;
    p.scalar_ = [](const Vec3&, double) { return 0.0; };
    p.vector_ = [](const Vec3&, double) { return Vec3{}; };
    p.charge_ = 1.0;
    p.scale_ = INFINITY;
    p.vacuum_ = true;
    return p;
}

EMPotential EMPotential::constant(double u0, double charge) {
    return EMPotential([u0](const Vec3&, double) { return u0; }, [](const Vec3&, double) { return Vec3{}; }, charge,
                       1e3);
}

EMPotential EMPotential::uniform_field(double g, double charge) {
    return EMPotential([g](const Vec3& x, double) { return -g * x.x; }, [](const Vec3&, double) { return Vec3{}; },
                       charge, 1e3);
}

EMPotential EMPotential::harmonic(double omega0, double charge) {
    const double k = omega0 * omega0;
    return EMPotential([k](const Vec3& x, double) { return 0.5 * k * x.x * x.x; },
                       [](const Vec3&, double) { return Vec3{}; }, charge, kMinScale);
}

Vec3 EMPotential::grad_U(const Vec3& x, double t) const {
    Vec3 g;
    g.x = d1([&](double s) { return U(x + unit(0) * s, t); });
    g.y = d1([&](double s) { return U(x + unit(1) * s, t); });
    g.z = d1([&](double s) { return U(x + unit(2) * s, t); });
    return g;
}

double EMPotential::dU_dt(const Vec3& x, double t) const {
    return d1([&](double s) { return U(x, t + s); });
}

double EMPotential::div_A(const Vec3& x, double t) const {
    double div = 0.0;
    for (int i = 0; i < 3; ++i) div += d1([&](double s) { return component(A(x + unit(i) * s, t), i); });
    return div;
}

std::array<Vec3, 3> EMPotential::grad_A(const Vec3& x, double t) const {
    std::array<Vec3, 3> rows{};
    for (int i = 0; i < 3; ++i) {
        rows[i].x = d1([&](double s) { return A(x + unit(i) * s, t).x; });
        rows[i].y = d1([&](double s) { return A(x + unit(i) * s, t).y; });
        rows[i].z = d1([&](double s) { return A(x + unit(i) * s, t).z; });
    }
    return rows;
}

double EMPotential::gauge_residual(const Vec3& x, double t) const {
    if (vacuum_) return 0.0;
    return std::abs(dU_dt(x, t) + div_A(x, t));
}

double EMPotential::max_gauge_residual(const SampleBox& box, int samples, std::uint64_t seed) const {
    Sampler s{std::mt19937_64(seed), box};
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const auto [x, t] = s.next();
        const double g = gauge_residual(x, t);
        worst = std::max(worst, std::isnan(g) ? INFINITY : g);
    }
    return worst;
}

double EMPotential::slow_variation_ratio(const SampleBox& box, int samples, std::uint64_t seed) const {
    if (vacuum_) return 0.0;
    Sampler s{std::mt19937_64(seed), box};
    const double l2 = scale_ * scale_;
    double worst = 0.0;
    auto consider = [&](double curvature, double level) {
        const double r = l2 * std::abs(curvature) / (1.0 + std::abs(level));
        worst = std::max(worst, std::isnan(r) ? INFINITY : r);
    };
    for (int k = 0; k < samples; ++k) {
        const auto [x, t] = s.next();
        const double u = U(x, t);
        consider(d2([&](double h) { return U(x, t + h); }), u);
        for (int i = 0; i < 3; ++i) {
            consider(d2([&](double h) { return U(x + unit(i) * h, t); }), u);
            for (int j = 0; j < 3; ++j) {
                consider(d2([&](double h) { return component(A(x + unit(i) * h, t), j); }), u);
            }
        }
    }
    return worst;
}

}  // namespace breather
