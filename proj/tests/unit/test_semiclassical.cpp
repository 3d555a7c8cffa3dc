#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"

#include "breather/analytic.hpp"
#include "breather/em_potential.hpp"
#include "breather/errors.hpp"
#include "breather/residual.hpp"
#include "breather/semiclassical.hpp"

using namespace breather;
using std::numbers::pi;

namespace {

constexpr Complex kI{0.0, 1.0};

// Oscillator U = w^2 x^2 / 2 with initial action p0 x + beta x^2 / 2:
// S_c = c(t) + b(t) x + a(t) x^2 / 2, tan(theta) = beta / w.
struct Harmonic {
    double w, p0, theta;
    double a(double t) const { return -w * std::tan(w * t - theta); }
    double b(double t) const { return p0 * std::cos(theta) / std::cos(w * t - theta); }
    double c(double t) const {
        const double ct = std::cos(theta);
        return -(p0 * p0 * ct * ct / (2.0 * w)) * (std::tan(w * t - theta) + std::tan(theta));
    }
    double action(double t, double x) const { return c(t) + b(t) * x + 0.5 * a(t) * x * x; }
    Complex sigma(double t, double hbar) const {
        return -kI * hbar * (std::log(std::cos(w * t - theta)) - std::log(std::cos(theta)));
    }
};

// Lorentz-gauge pair U = eps x t, A = (-eps x^2 / 2, 0, 0), varying on a scale far above 50.
EMPotential gauge_pair(double eps) {
    return EMPotential([eps](const Vec3& x, double t) { return eps * x.x * t; },
                       [eps](const Vec3& x, double) { return Vec3{-0.5 * eps * x.x * x.x, 0.0, 0.0}; }, 1.0, 50.0);
}

}  // namespace

TEST_CASE("potential contract checks") {
    const auto U0 = [](const Vec3&, double) { return 0.0; };
    const auto A0 = [](const Vec3&, double) { return Vec3{}; };
    CHECK_THROWS_AS(EMPotential(U0, A0, 1.0, 49.0), InvalidInput);
    // dU/dt with no compensating div A breaks the Lorentz gauge.
    CHECK_THROWS_AS(EMPotential([](const Vec3&, double t) { return 1e-4 * t; }, A0, 1.0, 50.0), InvalidInput);
    // Varies on the Compton scale.
    CHECK_THROWS_AS(EMPotential([](const Vec3& x, double) { return 0.1 * std::sin(x.x); }, A0, 1.0, 50.0),
                    InvalidInput);
    CHECK_NOTHROW(gauge_pair(1e-5));
}

TEST_CASE("every potential used here passes the gauge check at 1000 points") {
    const std::vector<EMPotential> pots{EMPotential::none(), EMPotential::constant(0.02), EMPotential::uniform_field(1e-3),
                                        EMPotential::harmonic(0.01), gauge_pair(1e-5)};
    for (const auto& p : pots) CHECK(p.max_gauge_residual({}, 1000, 7) <= EMPotential::kGaugeTolerance);
    CHECK(EMPotential::none().is_vacuum());
    const auto h = EMPotential::harmonic(0.01);
    CHECK(h.grad_U({3.0, 0.0, 0.0}, 0.0).x == doctest::Approx(3e-4).epsilon(1e-10));
}

TEST_CASE("free trajectory") {
    const Vec3 x0{1.0, -2.0, 0.5}, p0{0.03, 0.01, -0.02};
    const auto tr = integrate_trajectory(EMPotential::none(), x0, p0, 0.0, 50.0, 0.1);
    CHECK(tr.times.back() == 50.0);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.times[i];
        CHECK(norm(tr.positions[i] - (x0 + p0 * t)) < 1e-12);
        CHECK(norm(tr.momenta[i] - p0) == 0.0);
        const SpacetimePoint pt = at(t, tr.positions[i]);
        CHECK(std::abs(tr.action[i] - free_classical_action(p0, pt)) < 1e-12);
        CHECK(tr.sigma[i] == Complex{});
        CHECK(tr.jacobian[i] == doctest::Approx(1.0));
    }
    const auto mid = tr.at(12.345);
    CHECK(norm(mid.x - (x0 + p0 * 12.345)) < 1e-12);
    CHECK(norm(mid.v - p0) < 1e-12);
    CHECK_THROWS_AS(tr.at(51.0), InvalidInput);
}

TEST_CASE("trajectory input checks") {
    const auto h = EMPotential::harmonic(0.01);
    CHECK_THROWS_AS(integrate_trajectory(h, {}, {}, 0.0, 10.0, 0.6), InvalidInput);  // dt > L / 100
    CHECK_THROWS_AS(integrate_trajectory(h, {}, {}, 0.0, 10.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(integrate_trajectory(h, {}, {}, 10.0, 0.0, 0.1), InvalidInput);
    CHECK_THROWS_AS(integrate_trajectory(h, {}, {0.2, 0.0, 0.0}, 0.0, 10.0, 0.1), InvalidInput);
    const EMPotential blowup([](const Vec3& x, double) { return x.x > 5.0 ? NAN : 0.0; },
                             [](const Vec3&, double) { return Vec3{}; }, 1.0, 50.0, SampleBox{{-1, -1, -1}, {1, 1, 1}});
    CHECK_THROWS_AS(integrate_trajectory(blowup, {}, {0.1, 0.0, 0.0}, 0.0, 100.0, 0.1), Error);
}

TEST_CASE("uniform field: RK4 reproduces the parabola and grad S_c") {
    const double g = 1e-3, p0 = 0.02;
    const auto tr = integrate_trajectory(EMPotential::uniform_field(g), {}, {p0, 0.0, 0.0}, 0.0, 100.0, 0.1);
    double worst_p = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.times[i];
        CHECK(std::abs(tr.positions[i].x - (p0 * t + 0.5 * g * t * t)) < 1e-10);
        worst_p = std::max(worst_p, std::abs(tr.momenta[i].x - (p0 + g * t)));
        const SpacetimePoint pt = at(t, tr.positions[i]);
        CHECK(std::abs(tr.action[i].real() - uniform_field_classical_action(g, p0, pt)) < 1e-10);
        CHECK(std::abs(tr.laplacian[i]) < 1e-12);
    }
    CHECK(worst_p <= 1e-6);
    CHECK(worst_p < 1e-12);
}

TEST_CASE("closed-form classical actions") {
    CHECK(free_classical_action({0.1, 0.0, 0.0}, {2.0, 3.0, 0.0, 0.0}) == doctest::Approx(0.3 - 0.01));
    const SpacetimePoint pt{7.0, 2.0, 0.0, 0.0};
    CHECK(uniform_field_classical_action(0.0, 0.05, pt) == doctest::Approx(free_classical_action({0.05, 0, 0}, pt)));
    CHECK(uniform_field_classical_action(1e-9, 0.05, pt) ==
          doctest::Approx(free_classical_action({0.05, 0, 0}, pt)).epsilon(1e-7));

    const double g = 1e-3, p0 = 0.02;
    const Grid grid({{Axis::t, 33, 0.0, 1.0}, {Axis::x, 33, -8.0, 0.5}});
    const auto field = eval_on_grid(
        [&](const SpacetimePoint& p) { return Complex(uniform_field_classical_action(g, p0, p)); }, grid);
    // Cubic in t: the fourth-order stencil differentiates it exactly.
    CHECK(classical_action_residual(field, EMPotential::uniform_field(g), StencilSpec{4, {}}).linf < 1e-12);
    CHECK(classical_action_residual(field, EMPotential::uniform_field(g), StencilSpec{}).linf ==
          doctest::Approx(g * g / 6.0).epsilon(1e-6));
    // Dropping the potential term leaves e U = -g x behind.
    CHECK(classical_action_residual(field, EMPotential::none(), StencilSpec{4, {}}).linf ==
          doctest::Approx(g * 7.0).epsilon(1e-6));  // interior ends two cells in
}

TEST_CASE("harmonic oscillator: energy, tangent map and sigma") {
    const double w = 0.01, beta = 0.002, p0 = 0.02, hbar = 1.0;
    const Harmonic hm{w, p0, std::atan(beta / w)};
    const auto pot = EMPotential::harmonic(w);
    const double x0 = 1.5;
    TrajectoryOptions opt;
    opt.initial_action = hm.action(0.0, x0);
    opt.initial_hessian[0].x = beta;
    opt.hbar = hbar;
    const double T = 100.0;
    const auto tr = integrate_trajectory(pot, {x0, 0.0, 0.0}, {p0 + beta * x0, 0.0, 0.0}, 0.0, T, 0.1, opt);
    for (std::size_t i = 0; i < tr.size(); i += 50) {
        const double t = tr.times[i];
        const double x = tr.positions[i].x;
        CHECK(tr.momenta[i].x == doctest::Approx(hm.b(t) + hm.a(t) * x).epsilon(1e-10));
        CHECK(tr.laplacian[i] == doctest::Approx(hm.a(t)).epsilon(1e-8));
        CHECK(tr.jacobian[i] == doctest::Approx(std::cos(w * t - hm.theta) / std::cos(hm.theta)).epsilon(1e-10));
        CHECK(tr.action[i].real() == doctest::Approx(hm.action(t, x)).epsilon(1e-9));
        if (i > 0) CHECK(std::abs(tr.sigma[i] - hm.sigma(t, hbar)) <= 1e-8 * std::abs(hm.sigma(t, hbar)));
    }

    // Energy over one full period; the orbit crosses caustics of its family.
    TrajectoryOptions orbit;
    orbit.transport_correction = false;
    const auto osc = integrate_trajectory(pot, {2.0, 0.0, 0.0}, {0.01, 0.0, 0.0}, 0.0, 2.0 * pi / w, 0.5, orbit);
    CHECK(osc.sigma.back() == Complex{});
    const auto energy = [&](std::size_t i) {
        return 0.5 * dot(osc.momenta[i], osc.momenta[i]) + pot.U(osc.positions[i], osc.times[i]);
    };
    CHECK(std::abs(energy(osc.size() - 1) - energy(0)) <= 1e-10);
    CHECK(norm(osc.positions.back() - Vec3{2.0, 0.0, 0.0}) < 1e-6);
}

TEST_CASE("focusing trajectory bundle raises CausticError") {
    // Without an initial Hessian all rays meet at w t = pi / 2.
    try {
        integrate_trajectory(EMPotential::harmonic(0.01), {1.0, 0.0, 0.0}, {}, 0.0, 200.0, 0.1);
        FAIL("expected CausticError");
    } catch (const CausticError& e) {
        REQUIRE(e.region().size() == 1);
        CHECK(static_cast<double>(e.region()[0]) * 0.1 == doctest::Approx(50.0 * pi).epsilon(2e-3));
    }
}

TEST_CASE("semiclassical correction: free and linear cases leave S_c unchanged") {
    const Grid grid({{Axis::t, 21, 0.0, 1.0}, {Axis::x, 41, -10.0, 0.5}});
    SUBCASE("free") {
        const auto sc = eval_on_grid(
            [](const SpacetimePoint& p) { return Complex(free_classical_action({0.05, 0.0, 0.0}, p)); }, grid);
        const auto res = semiclassical_correction(sc, EMPotential::none(), StencilSpec{});
        std::size_t valid = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(std::abs(res.s_sc.values[i] - sc.values[i]) < 1e-12);
            valid += res.valid[i];
        }
        CHECK(valid > grid.size() / 2);
    }
    SUBCASE("uniform field") {
        const auto sc = eval_on_grid(
            [](const SpacetimePoint& p) { return Complex(uniform_field_classical_action(1e-3, 0.02, p)); }, grid);
        const auto res = semiclassical_correction(sc, EMPotential::uniform_field(1e-3), StencilSpec{});
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(res.s_sc.values[i] - sc.values[i]) < 1e-10);
    }
}

TEST_CASE("semiclassical correction: oscillator matches the closed-form sigma") {
    const double w = 0.01, beta = 0.002, p0 = 0.02;
    const Harmonic hm{w, p0, std::atan(beta / w)};
    const Grid grid({{Axis::t, 101, 0.0, 1.0}, {Axis::x, 81, -20.0, 0.5}});
    const auto sc = eval_on_grid([&](const SpacetimePoint& p) { return Complex(hm.action(p.t, p.x)); }, grid);
    for (const double hbar : {1.0, 0.5}) {
        const auto res = semiclassical_correction(sc, EMPotential::harmonic(w), StencilSpec{}, hbar);
        double worst = 0.0;
        std::size_t covered = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto p = grid.point(i);
            if (!res.valid[i] || p.t == 0.0) continue;
            ++covered;
            const Complex sig = res.s_sc.values[i] - sc.values[i];
            const Complex want = hm.sigma(p.t, hbar);
            worst = std::max(worst, std::abs(sig - want) / std::abs(want));
        }
        CHECK(covered > grid.size() / 2);
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("semiclassical correction: crossing characteristics are flagged") {
    // Rays dx/dt = tanh(2 x) spread from x = 0. Traced backwards with a step
    // too long for the velocity gradient, neighbouring feet swap order.
    const auto field = [](double dt) {
        const Grid grid({{Axis::t, 5, 0.0, dt}, {Axis::x, 61, -3.0, 0.1}});
        return eval_on_grid([](const SpacetimePoint& p) { return Complex(0.5 * std::log(std::cosh(2.0 * p.x))); },
                            grid);
    };
    const auto coarse = field(2.0);
    try {
        semiclassical_correction(coarse, EMPotential::none(), StencilSpec{});
        FAIL("expected CausticError");
    } catch (const CausticError& e) {
        CHECK_FALSE(e.region().empty());
        for (const auto idx : e.region()) CHECK(coarse.grid.point(idx).t > 0.0);
    }
    CHECK_NOTHROW(semiclassical_correction(field(1.0), EMPotential::none(), StencilSpec{}));

    const Grid no_time({{Axis::x, 10, 0.0, 1.0}});
    CHECK_THROWS_AS(semiclassical_correction(ComplexField(no_time), EMPotential::none(), StencilSpec{}), InvalidInput);
}

TEST_CASE("slowly varying breather action") {
    const BreatherSpec spec{0.1, 0, 0, {}, {}};
    const SpacetimePoint pt{1.3, 0.4, -0.2, 0.7};
    CHECK(std::abs(slowly_varying_breather_action(EMPotential::none(), spec, pt).value -
                   breather_action(spec, pt).value) < 1e-14);
    for (const double u0 : {0.0, 0.01, 0.02}) {
        const auto pot = EMPotential::constant(u0);
        const auto bare = slowly_varying_breather_action(pot, {0.0, 0, 0, {}, {}}, pt);
        CHECK(bare.value.real() == doctest::Approx(-(1.0 + u0) * pt.t).epsilon(1e-15));
        // The log term keeps oscillating at the unshifted clock rate.
        const auto s0 = slowly_varying_breather_action(pot, spec, pt).value;
        const auto s1 = slowly_varying_breather_action(pot, spec, {pt.t + 2.0 * pi, pt.x, pt.y, pt.z}).value;
        CHECK(std::abs((s1 - s0) - Complex(-(1.0 + u0) * 2.0 * pi, 0.0)) < 1e-12);
    }
}

TEST_CASE("uniform asymptotic action") {
    const BreatherSpec spec{0.1, 0, 0, {}, {}};
    SUBCASE("free particle at rest reduces to the breather action") {
        const auto tr = integrate_trajectory(EMPotential::none(), {}, {}, 0.0, 20.0, 0.1);
        for (const SpacetimePoint pt : {SpacetimePoint{3.0, 0.5, 0.2, -0.1}, SpacetimePoint{17.2, -4.0, 1.0, 2.0}}) {
            CHECK(std::abs(uniform_asymptotic_action(EMPotential::none(), tr, spec, pt).value -
                           breather_action(spec, pt).value) < 1e-12);
        }
    }
    SUBCASE("moving free particle: envelope follows x_p and carries the de Broglie phase") {
        const double v = 0.05;
        const auto tr = integrate_trajectory(EMPotential::none(), {}, {v, 0.0, 0.0}, 0.0, 200.0, 0.5);
        const BreatherSpec bare{0.0, 0, 0, {}, {}};
        const double t = 150.0;
        const double lambda = 2.0 * pi / v;
        const auto a = uniform_asymptotic_action(EMPotential::none(), tr, bare, {t, v * t - 0.5 * lambda / 10.0, 0, 0});
        const auto b = uniform_asymptotic_action(EMPotential::none(), tr, bare, {t, v * t + 0.5 * lambda / 10.0, 0, 0});
        CHECK((b.value - a.value).real() == doctest::Approx(2.0 * pi / 10.0).epsilon(1e-12));
        // |Psi - regular| peaks at the trajectory point.
        auto envelope = [&](double x) {
            const SpacetimePoint pt{t, x, 0.0, 0.0};
            const Complex full = std::exp(kI * uniform_asymptotic_action(EMPotential::none(), tr, spec, pt).value);
            const Complex reg = std::exp(kI * uniform_asymptotic_action(EMPotential::none(), tr, bare, pt).value);
            return std::abs(full - reg);
        };
        CHECK(envelope(v * t) > envelope(v * t + 0.3));
        CHECK(envelope(v * t) > envelope(v * t - 0.3));
    }
    SUBCASE("window checks") {
        const auto tr = integrate_trajectory(EMPotential::none(), {}, {}, 0.0, 20.0, 0.1);
        CHECK_THROWS_AS(uniform_asymptotic_action(EMPotential::none(), tr, spec, {5.0, 21.0, 0.0, 0.0}), InvalidInput);
        TrajectoryOptions fast;
        fast.max_momentum = 1.0;
        const auto tf = integrate_trajectory(EMPotential::none(), {}, {0.2, 0.0, 0.0}, 0.0, 20.0, 0.1, fast);
        CHECK_THROWS_AS(uniform_asymptotic_action(EMPotential::none(), tf, spec, {5.0, 1.0, 0.0, 0.0}), InvalidInput);
    }
}
