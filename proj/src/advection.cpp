#include "breather/advection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "breather/errors.hpp"
#include "breather/kernels.hpp"

namespace breather {

namespace {

double label_component(const Vec3& v, Axis a) {
    switch (a) {
        case Axis::x: return v.x;
        case Axis::y: return v.y;
        case Axis::z: return v.z;
        default: return 0.0;
    }
}

std::vector<double> sample(const Grid& g, const RealFunction& f, const Vec3& shift) {
    std::vector<double> out(g.size());
    const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = f(g.point(static_cast<std::size_t>(i)).position() - shift);
    return out;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void check_support(const Grid& g, const std::vector<double>& s, double threshold, std::size_t cells, const char* when) {
    std::vector<std::size_t> idx(g.rank());
    for (std::size_t flat = 0; flat < s.size(); ++flat) {
        if (!(std::abs(s[flat]) > threshold)) continue;
        g.unravel(flat, idx);
        for (std::size_t a = 0; a < g.rank(); ++a) {
            const std::size_t n = g.axis(a).count;
            if (idx[a] < cells || idx[a] + cells >= n) {
                std::ostringstream os;
                os << "advect_check: perturbation support reaches within " << cells << " cells of the boundary "
                   << when;
                throw InvalidInput(os.str());
            }
        }
    }
}

}  // namespace

AdvectionReport advect_check(const PlaneWaveSpec& background, const RealFunction& s0, const Grid& spatial,
                             double t_final, const AdvectionOptions& options) {
    if (spatial.has_time()) throw InvalidInput("advect_check: expected a spatial grid");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw InvalidInput("advect_check: t_final must be non-negative");
    if (!(options.cfl > 0.0)) throw InvalidInput("advect_check: cfl must be positive");
    const Vec3 v = group_velocity(background);
    if (!(norm(v) < 1.0)) throw InvalidInput("advect_check: |v| must be below 1");

    AdvectionReport rep;
    rep.velocity = v;

    std::vector<double> s = sample(spatial, s0, {});
    const std::vector<double> exact = sample(spatial, s0, v * t_final);
    rep.amplitude_initial = max_abs(s);
    const double thr = options.support_threshold * rep.amplitude_initial;
    check_support(spatial, s, thr, options.boundary_cells, "at t = 0");
    check_support(spatial, exact, thr, options.boundary_cells, "at t_final");

    const auto layout = kernels::Layout::of(spatial);
    std::array<double, 4> vel{};
    for (std::size_t a = 0; a < spatial.rank(); ++a) vel[layout.slot(a)] = label_component(v, spatial.axis(a).label);

    const double speed = norm(v);
    std::size_t steps = 0;
    if (t_final > 0.0 && speed > 0.0) {
        const double dt_max = options.cfl * spatial.min_spatial_spacing() / speed;
        steps = static_cast<std::size_t>(std::ceil(t_final / dt_max));
    }
    const double dt = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
    rep.steps = steps;
    rep.dt = dt;

    const std::size_t n = s.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    auto rhs = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (options.exec == Execution::parallel) {
            kernels::omp::transport_rhs(layout, vel, in, out);
        } else {
            kernels::serial::transport_rhs(layout, vel, in, out);
        }
    };
    for (std::size_t step = 0; step < steps; ++step) {
        rhs(s, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < n; ++i) s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = s[i] - exact[i];
        sq += d * d;
        rep.linf_deviation = std::max(rep.linf_deviation, std::abs(d));
    }
    rep.l2_deviation = std::sqrt(sq / static_cast<double>(n));
    rep.amplitude_final = max_abs(s);
    rep.amplitude_drift = rep.amplitude_initial > 0.0
                              ? std::abs(rep.amplitude_final - rep.amplitude_initial) / rep.amplitude_initial
                              : 0.0;
    return rep;
}

}  // namespace breather
