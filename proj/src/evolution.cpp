#include "breather/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "breather/errors.hpp"
#include "breather/kernels.hpp"

namespace breather {

namespace {

Grid with_time(const Grid& g, double t) {
    SpacetimePoint base = g.base();
    base.t = t;
    return Grid(g.axes(), base);
}

void check_spatial(const Grid& g, const char* who) {
    if (g.has_time()) throw InvalidInput(std::string(who) + ": expected a spatial grid without a time axis");
}

ComplexField sample(const PointFunction& f, const Grid& g, Execution exec) {
    ComplexField out(g);
    const std::size_t bad = exec == Execution::parallel ? kernels::omp::map_grid(g, f, out.values)
                                                        : kernels::serial::map_grid(g, f, out.values);
    if (bad != kernels::kNoIndex) throw InvalidInput("evolution: reference solution is not finite");
    return out;
}

// Flat indices on the outermost layer of every sampled axis with more than one point.
std::vector<std::size_t> boundary_layer(const Grid& g) {
    std::vector<std::size_t> out;
    std::vector<std::size_t> idx(g.rank());
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unravel(flat, idx);
        for (std::size_t a = 0; a < g.rank(); ++a) {
            const std::size_t n = g.axis(a).count;
            if (n > 1 && (idx[a] == 0 || idx[a] + 1 == n)) {
                out.push_back(flat);
                break;
            }
        }
    }
    return out;
}

std::size_t nearest_node(const Grid& g, const Vec3& x) {
    std::vector<std::size_t> idx(g.rank());
    const SpacetimePoint p = at(0.0, x);
    for (std::size_t a = 0; a < g.rank(); ++a) {
        const auto& ax = g.axis(a);
        const double k = std::round((p[ax.label] - ax.origin) / ax.spacing);
        idx[a] = static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(ax.count - 1)));
    }
    return g.ravel(idx);
}

std::size_t first_bad(std::span<const Complex> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return i;
    }
    return kernels::kNoIndex;
}

std::vector<double> envelope(const ComplexField& field, std::span<const Complex> background) {
    if (background.size() != field.size()) throw InvalidInput("localization: background size differs from field");
    std::vector<double> env(field.size());
    for (std::size_t i = 0; i < env.size(); ++i) env[i] = std::abs(field.values[i] - background[i]);
    return env;
}

}  // namespace

EvolutionState exact_state(const PointFunction& exact, const Grid& spatial, double t0, double dt, Execution exec) {
    check_spatial(spatial, "exact_state");
    EvolutionState s;
    s.psi_now = sample(exact, with_time(spatial, t0), exec);
    s.psi_prev = sample(exact, with_time(spatial, t0 - dt), exec);
    s.time = t0;
    s.dt = dt;
    return s;
}

EvolutionState reversed(EvolutionState state) {
    std::swap(state.psi_now, state.psi_prev);
    state.time -= state.dt;
    state.dt = -state.dt;
    return state;
}

double max_stable_dt(const Grid& spatial) {
    double sum = 0.0;
    for (const auto& a : spatial.axes()) {
        if (a.label != Axis::t && a.count > 1) sum += 1.0 / (a.spacing * a.spacing);
    }
    return 2.0 / std::sqrt(4.0 * sum + 1.0);
}

EvolveResult kg_evolve(EvolutionState state, std::size_t steps, const EvolveOptions& options) {
    const Grid& grid = state.psi_now.grid;
    check_spatial(grid, "kg_evolve");
    if (state.psi_prev.size() != state.psi_now.size()) throw InvalidInput("kg_evolve: levels differ in size");
    if (!(std::abs(state.dt) > 0.0) || std::abs(state.dt) > max_stable_dt(grid)) {
        std::ostringstream os;
        os << "kg_evolve: |dt| = " << std::abs(state.dt) << " violates the CFL limit " << max_stable_dt(grid);
        throw InvalidInput(os.str());
    }
    const bool periodic = options.boundary == Boundary::periodic;
    if (!periodic && !options.reference) throw InvalidInput("kg_evolve: analytic-dirichlet needs a reference solution");
    if (options.probe_every == 0) throw InvalidInput("kg_evolve: probe_every must be positive");

    const auto layout = kernels::Layout::of(grid);
    const std::vector<std::size_t> layer = periodic ? std::vector<std::size_t>{} : boundary_layer(grid);
    std::vector<std::size_t> probe_nodes;
    for (const auto& p : options.probes) probe_nodes.push_back(nearest_node(grid, p));

    EvolveResult result;
    result.probes.resize(probe_nodes.size());
    auto record = [&](const EvolutionState& s) {
        if (probe_nodes.empty()) return;
        double ratio = 0.0;
        if (options.background) {
            const Grid g = with_time(grid, s.time);
            const auto bg = sample_background(g, options.background);
            ratio = localization_metric(s.psi_now, bg, options.localization_radius);
        }
        for (std::size_t k = 0; k < probe_nodes.size(); ++k) {
            result.probes[k].push_back({s.time, s.psi_now.values[probe_nodes[k]], ratio});
        }
    };
    record(state);

    std::vector<Complex> next(state.psi_now.size());
    for (std::size_t step = 1; step <= steps; ++step) {
        if (options.exec == Execution::parallel) {
            kernels::omp::leapfrog_step(layout, state.dt, state.psi_now.values, state.psi_prev.values, next, periodic);
        } else {
            kernels::serial::leapfrog_step(layout, state.dt, state.psi_now.values, state.psi_prev.values, next,
                                           periodic);
        }
        const double t_next = state.time + state.dt;
        if (!periodic) {
            const auto n = static_cast<std::ptrdiff_t>(layer.size());
#pragma omp parallel for schedule(static) if (options.exec == Execution::parallel)
            for (std::ptrdiff_t i = 0; i < n; ++i) {
                SpacetimePoint p = grid.point(layer[i]);
                p.t = t_next;
                next[layer[i]] = options.reference(p);
            }
        }
        if (const std::size_t bad = first_bad(next); bad != kernels::kNoIndex) {
            std::ostringstream os;
            os << "kg_evolve: non-finite value at step " << step << " (node " << bad << ")";
            throw DivergenceError(os.str(), step);
        }
        std::swap(state.psi_prev.values, state.psi_now.values);
        std::swap(state.psi_now.values, next);
        state.time = t_next;
        if (step % options.probe_every == 0) record(state);
    }
    state.psi_now.grid = with_time(grid, state.time);
    state.psi_prev.grid = with_time(grid, state.time - state.dt);
    result.state = std::move(state);
    return result;
}

double discrete_energy(const EvolutionState& state) {
    const Grid& g = state.psi_now.grid;
    const auto& now = state.psi_now.values;
    const auto& prev = state.psi_prev.values;
    double cell = 1.0;
    for (const auto& a : g.axes()) cell *= a.spacing;
    const double dt2 = state.dt * state.dt;
    std::vector<std::size_t> idx(g.rank());
    double kinetic = 0.0;
    double potential = 0.0;
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unravel(flat, idx);
        Complex lap{0.0, 0.0};
        for (std::size_t a = 0; a < g.rank(); ++a) {
            const std::size_t n = g.axis(a).count;
            if (n < 2) continue;
            const std::size_t s = g.stride(a);
            const std::size_t up = idx[a] + 1 == n ? flat - (n - 1) * s : flat + s;
            const std::size_t down = idx[a] == 0 ? flat + (n - 1) * s : flat - s;
            lap += (prev[up] + prev[down] - 2.0 * prev[flat]) / (g.axis(a).spacing * g.axis(a).spacing);
        }
        kinetic += std::norm(now[flat] - prev[flat]) / dt2;
        potential += (std::conj(now[flat]) * (prev[flat] - lap)).real();
    }
    return (kinetic + potential) * cell;
}

std::vector<Complex> sample_background(const Grid& grid, const PointFunction& background) {
    std::vector<Complex> out(grid.size());
    kernels::omp::map_grid(grid, background, out);
    return out;
}

double localization_metric(const ComplexField& field, std::span<const Complex> background, double radius) {
    const Grid& g = field.grid;
    if (!(radius >= 2.0 * g.min_spatial_spacing())) {
        throw InvalidInput("localization_metric: radius must span at least two grid cells");
    }
    const auto env = envelope(field, background);
    const auto imax = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
    const double peak = env[imax];
    if (!(peak > 0.0)) return 0.0;
    const Vec3 c = g.point(imax).position();
    double outside = 0.0;
    for (std::size_t i = 0; i < env.size(); ++i) {
        if (norm(g.point(i).position() - c) > radius) outside = std::max(outside, env[i]);
    }
    return outside / peak;
}

Vec3 envelope_center(const ComplexField& field, std::span<const Complex> background) {
    const Grid& g = field.grid;
    const auto env = envelope(field, background);
    const auto imax = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
    std::vector<std::size_t> idx(g.rank());
    g.unravel(imax, idx);
    SpacetimePoint p = g.point(imax);
    for (std::size_t a = 0; a < g.rank(); ++a) {
        const auto& ax = g.axis(a);
        if (ax.label == Axis::t || idx[a] == 0 || idx[a] + 1 >= ax.count) continue;
        const double fm = env[imax - g.stride(a)];
        const double f0 = env[imax];
        const double fp = env[imax + g.stride(a)];
        const double curvature = fm - 2.0 * f0 + fp;
        if (curvature < 0.0) p[ax.label] += 0.5 * (fm - fp) / curvature * ax.spacing;
    }
    return p.position();
}

double relative_l2_error(const ComplexField& field, const PointFunction& exact, Execution exec) {
    const Grid& g = field.grid;
    auto diff = [&](std::size_t i) { return std::norm(field.values[i] - exact(g.point(i))); };
    auto ref = [&](std::size_t i) { return std::norm(exact(g.point(i))); };
    const double num = exec == Execution::parallel ? kernels::omp::blocked_sum(g.size(), diff)
                                                   : kernels::serial::blocked_sum(g.size(), diff);
    const double den = exec == Execution::parallel ? kernels::omp::blocked_sum(g.size(), ref)
                                                   : kernels::serial::blocked_sum(g.size(), ref);
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace breather
