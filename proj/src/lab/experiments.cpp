#include "breather/lab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "json.hpp"

#include "breather/advection.hpp"
#include "breather/analytic.hpp"
#include "breather/em_potential.hpp"
#include "breather/evolution.hpp"
#include "breather/field_io.hpp"
#include "breather/lab/csv.hpp"
#include "breather/parallel.hpp"
#include "breather/quantization.hpp"
#include "breather/residual.hpp"
#include "breather/semiclassical.hpp"

#ifndef BREATHER_VERSION
#define BREATHER_VERSION "unknown"
#endif

namespace breather::lab {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

Complex cis(double a) { return {std::cos(a), std::sin(a)}; }

class Checks {
public:
    explicit Checks(std::vector<Assertion>& out) : out_(out) {}

    void le(std::string name, double measured, double bound) {
        out_.push_back({std::move(name), measured <= bound, measured, bound, "<=", 0.0});
    }
    void ge(std::string name, double measured, double bound) {
        out_.push_back({std::move(name), measured >= bound, measured, bound, ">=", 0.0});
    }
    void within(std::string name, double measured, double target, double tol) {
        out_.push_back({std::move(name), std::abs(measured - target) <= tol, measured, tol, "within", target});
    }
    void holds(std::string name, bool ok) {
        out_.push_back({std::move(name), ok, ok ? 1.0 : 0.0, 1.0, "==", 1.0});
    }

private:
    std::vector<Assertion>& out_;
};

struct Context {
    const ExperimentConfig& cfg;
    fs::path dir;
    RunResult& result;
    Checks checks;

    fs::path file(const std::string& name) {
        result.outputs.push_back(name);
        return dir / name;
    }
};

std::size_t as_size(std::int64_t v, const char* key, std::int64_t min = 1) {
    if (v < min) throw ConfigError("parameter '" + std::string(key) + "' must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> sizes(const std::vector<std::int64_t>& v, const char* key, std::int64_t min) {
    std::vector<std::size_t> out;
    for (const auto x : v) out.push_back(as_size(x, key, min));
    return out;
}

// Deterministic uniform variates in [0, 1) independent of the standard
// library's distribution implementation.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : rng_(seed) {}
    double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------- residual study

struct LevelRow {
    std::size_t points;
    double h;
    double dt;
    double linf;
    double l2;
};

struct ResidualProblem {
    PointFunction psi;
    PointFunction action;
    std::optional<EMPotential> potential;
    bool qhj = false;
    bool unwrap = true;
    int order = 2;
    double half_extent = 6.0;
    double time_extent = 2.0 * kPi;
};

std::vector<LevelRow> residual_study(const ResidualProblem& pb, const std::vector<std::size_t>& levels,
                                     int spatial_dims = 3) {
    std::vector<LevelRow> rows;
    const EMPotential* pot = pb.potential ? &*pb.potential : nullptr;
    for (const auto n : levels) {
        const double h = 2.0 * pb.half_extent / static_cast<double>(n - 1);
        const double dt = pb.time_extent / static_cast<double>(n - 1);
        std::vector<AxisSpec> axes{{Axis::t, n, 0.0, dt}};
        const Axis spatial[] = {Axis::x, Axis::y, Axis::z};
        for (int a = 0; a < spatial_dims; ++a) axes.push_back({spatial[a], n, -pb.half_extent, h});
        const Grid g(axes);
        ResidualReport rep;
        const StencilSpec stencil{pb.order, {}};
        if (!pb.qhj) {
            rep = kg_residual(eval_on_grid(pb.psi, g), stencil, pot);
        } else if (pb.unwrap) {
            rep = qhj_residual(action_field_from_psi(eval_on_grid(pb.psi, g)), stencil, pot);
        } else {
            rep = qhj_residual(eval_on_grid(pb.action, g), stencil, pot);
        }
        rows.push_back({n, h, dt, rep.linf, rep.l2});
    }
    return rows;
}

std::vector<double> l2_orders(const std::vector<LevelRow>& rows) {
    std::vector<double> h, e;
    for (const auto& r : rows) {
        h.push_back(r.h);
        e.push_back(r.l2);
    }
    return rows.size() < 2 ? std::vector<double>{} : pairwise_orders(h, e);
}

void write_residual_csv(Context& ctx, const std::string& name, const std::vector<LevelRow>& rows) {
    CsvWriter csv(ctx.file(name), {"points", "h", "dt", "linf", "l2", "order_l2", "order_linf"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        Cell ol2, olinf;
        if (i > 0) {
            ol2 = observed_order(rows[i - 1].h, rows[i - 1].l2, r.h, r.l2);
            olinf = observed_order(rows[i - 1].h, rows[i - 1].linf, r.h, r.linf);
        }
        csv.row({static_cast<std::int64_t>(r.points), r.h, r.dt, r.linf, r.l2, ol2, olinf});
    }
}

std::string pair_name(const std::vector<LevelRow>& rows, std::size_t i) {
    return std::to_string(rows[i].points) + "->" + std::to_string(rows[i + 1].points);
}

// Exact families: either the discretization is exact (residual at roundoff)
// or the RMS residual converges at the stencil order.
void check_convergence(Context& ctx, const std::string& prefix, const std::vector<LevelRow>& rows, double target,
                       double tol) {
    if (rows.back().linf <= 1e-10) {
        ctx.checks.le(prefix + "residual at roundoff", rows.back().linf, 1e-10);
        return;
    }
    const auto orders = l2_orders(rows);
    for (std::size_t i = 0; i < orders.size(); ++i) {
        ctx.checks.within(prefix + "order " + pair_name(rows, i), orders[i], target, tol);
    }
}

BreatherSpec breather_from(const ExperimentConfig& cfg, double v) {
    BreatherSpec s{{cfg.real("alpha"), 0.0}, 0, 0, {v, 0.0, 0.0}, {}};
    s.validate();
    return s;
}

void run_residual(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const std::string family = cfg.string("family");
    ResidualProblem pb;
    pb.qhj = cfg.string("form") == "qhj";
    pb.unwrap = cfg.boolean("unwrap");
    pb.order = static_cast<int>(cfg.integer("stencil_order"));
    pb.half_extent = cfg.real("half_extent");
    pb.time_extent = cfg.real("time_extent");
    std::optional<double> plateau;

    if (family == "plane") {
        const PlaneWaveSpec pw = PlaneWaveSpec::on_shell({cfg.real("momentum"), 0.0, 0.0});
        pb.psi = [pw](const SpacetimePoint& pt) { return plane_wave_action(pw, pt).psi(); };
        pb.action = [pw](const SpacetimePoint& pt) { return plane_wave_action(pw, pt).value; };
    } else if (family == "breather") {
        BreatherSpec s{{cfg.real("alpha"), 0.0},
                       static_cast<int>(cfg.integer("l")),
                       static_cast<int>(cfg.integer("n")),
                       {cfg.real("boost_v"), 0.0, 0.0},
                       {}};
        s.validate();
        pb.psi = [s](const SpacetimePoint& pt) { return breather_psi(s, pt); };
        pb.action = [s](const SpacetimePoint& pt) { return breather_action(s, pt).value; };
    } else if (family == "off_shell") {
        const double w = cfg.real("omega");
        pb.psi = [w](const SpacetimePoint& pt) { return cis(-w * pt.t); };
        pb.action = [w](const SpacetimePoint& pt) { return Complex(-w * pt.t); };
        plateau = std::abs(1.0 - w * w);
    } else {
        // Constant potential e U = u with the sign of the energy shift reversed.
        const double u = cfg.real("potential");
        pb.potential = EMPotential::constant(u);
        pb.psi = [u](const SpacetimePoint& pt) { return cis(-(1.0 - u) * pt.t); };
        pb.action = [u](const SpacetimePoint& pt) { return Complex(-(1.0 - u) * pt.t); };
        plateau = std::abs((1.0 - 2.0 * u) * (1.0 - 2.0 * u) - 1.0);
    }

    const auto levels = sizes(cfg.integers("levels"), "levels", pb.order + 3);
    const auto rows = residual_study(pb, levels);
    write_residual_csv(ctx, "residual.csv", rows);
    if (plateau) {
        ctx.checks.within("control plateau (relative)", rows.back().linf / *plateau, 1.0,
                          cfg.real("plateau_tolerance"));
    } else {
        check_convergence(ctx, "", rows, static_cast<double>(pb.order), cfg.real("order_tolerance"));
    }
}

// ---------------------------------------------------------------- evolution

Grid evolution_grid(double x_lo, double x_hi, double half, double h, bool periodic) {
    auto count = [&](double lo, double hi) {
        const auto cells = static_cast<std::size_t>(std::llround((hi - lo) / h));
        return periodic ? cells : cells + 1;
    };
    return Grid({{Axis::x, count(x_lo, x_hi), x_lo, h},
                 {Axis::y, count(-half, half), -half, h},
                 {Axis::z, count(-half, half), -half, h}});
}

void run_evolve(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const BreatherSpec spec = breather_from(cfg, 0.0);
    const double h = cfg.real("h");
    const double dt = cfg.real("dt_factor") * h;
    const double half = cfg.real("half_extent");
    const bool periodic = cfg.string("boundary") == "periodic";
    const Grid g = evolution_grid(-half, half, half, h, periodic);
    const auto steps = static_cast<std::size_t>(std::llround(cfg.real("periods") * kPi / dt));

    const PointFunction exact = [spec](const SpacetimePoint& pt) { return breather_psi(spec, pt); };
    const PointFunction plane = [spec](const SpacetimePoint& pt) { return plane_term(spec, pt); };
    EvolveOptions opt;
    opt.boundary = periodic ? Boundary::periodic : Boundary::analytic_dirichlet;
    opt.reference = exact;
    opt.probes = {spec.center};
    opt.probe_every = as_size(cfg.integer("probe_every"), "probe_every");
    opt.background = plane;
    opt.localization_radius = cfg.real("radius");

    const auto initial = exact_state(exact, g, 0.0, dt);
    const double loc0 = localization_metric(initial.psi_now, sample_background(g, plane), opt.localization_radius);
    const auto res = kg_evolve(initial, steps, opt);
    const auto& final_field = res.state.psi_now;
    const double loc1 = localization_metric(final_field, sample_background(final_field.grid, plane),
                                            opt.localization_radius);
    const double err = relative_l2_error(final_field, exact);

    CsvWriter csv(ctx.file("probes.csv"), {"t", "re_psi", "im_psi", "localization_ratio"});
    for (const auto& s : res.probes.front()) csv.row({s.t, s.psi.real(), s.psi.imag(), s.localization_ratio});
    CsvWriter summary(ctx.file("evolve_summary.csv"),
                      {"steps", "dt", "t_final", "relative_l2_error", "localization_t0", "localization_final"});
    summary.row({static_cast<std::int64_t>(steps), dt, res.state.time, err, loc0, loc1});
    if (cfg.boolean("write_field")) write_field(ctx.file("final_field.brth"), final_field);

    ctx.checks.le("relative L2 error vs analytic", err, cfg.real("l2_tolerance"));
    ctx.checks.le("localization drift (relative)", std::abs(loc1 - loc0) / loc0, cfg.real("drift_tolerance"));
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

void run_boost_check(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const double v = cfg.real("v");
    const BreatherSpec moving = breather_from(cfg, v);
    const BreatherSpec rest = breather_from(cfg, 0.0);

    // Residual convergence of the rest and boosted solutions.
    const auto levels = sizes(cfg.integers("levels"), "levels", 3);
    const double tol = cfg.real("order_tolerance");
    std::vector<LevelRow> rows[2];
    const BreatherSpec* specs[2] = {&rest, &moving};
    for (int k = 0; k < 2; ++k) {
        ResidualProblem pb;
        const BreatherSpec s = *specs[k];
        pb.psi = [s](const SpacetimePoint& pt) { return breather_psi(s, pt); };
        pb.half_extent = cfg.real("half_extent");
        pb.time_extent = cfg.real("time_extent");
        rows[k] = residual_study(pb, levels);
    }
    write_residual_csv(ctx, "residual_rest.csv", rows[0]);
    write_residual_csv(ctx, "residual_boosted.csv", rows[1]);
    check_convergence(ctx, "boosted ", rows[1], 2.0, tol);
    const auto o_rest = l2_orders(rows[0]);
    const auto o_boost = l2_orders(rows[1]);
    for (std::size_t i = 0; i < o_rest.size(); ++i) {
        ctx.checks.within("order gap boosted-rest " + pair_name(rows[0], i), o_boost[i] - o_rest[i], 0.0, tol);
    }

    // Envelope drift under leapfrog evolution.
    const double h = cfg.real("h");
    const double dt = cfg.real("dt_factor") * h;
    const double half = cfg.real("half_width");
    const double duration = cfg.real("duration");
    const double travel = v * duration;
    const Grid g = evolution_grid(std::min(0.0, travel) - half, std::max(0.0, travel) + half, half, h, false);
    const PointFunction exact = [moving](const SpacetimePoint& pt) { return breather_psi(moving, pt); };
    const PointFunction plane = [moving](const SpacetimePoint& pt) { return plane_term(moving, pt); };
    EvolveOptions opt;
    opt.boundary = Boundary::analytic_dirichlet;
    opt.reference = exact;
    const auto chunk = static_cast<std::size_t>(std::llround(cfg.real("sample_interval") / dt));
    const auto chunks = static_cast<std::size_t>(std::llround(duration / (static_cast<double>(chunk) * dt)));
    if (chunk == 0 || chunks < 2) throw ConfigError("boost-check: duration must cover at least two samples");

    EvolutionState st = exact_state(exact, g, 0.0, dt);
    std::vector<double> ts, xs;
    CsvWriter csv(ctx.file("drift.csv"), {"t", "x_center", "y_center", "z_center"});
    for (std::size_t c = 0; c <= chunks; ++c) {
        const Vec3 ctr = envelope_center(st.psi_now, sample_background(st.psi_now.grid, plane));
        csv.row({st.time, ctr.x, ctr.y, ctr.z});
        ts.push_back(st.time);
        xs.push_back(ctr.x);
        if (c < chunks) st = kg_evolve(std::move(st), chunk, opt).state;
    }
    ctx.checks.within("envelope drift velocity", regression_slope(ts, xs), v, cfg.real("velocity_tolerance"));
}

// ---------------------------------------------------------------- quantization

void run_quantize_scan(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const double d = cfg.real("d");
    Uniform uni(cfg.seed);
    std::vector<SpacetimePoint> samples;
    for (std::size_t i = 0; i < as_size(cfg.integer("samples"), "samples"); ++i) {
        const double x = d * uni();
        const double y = 2.0 * uni() - 1.0;
        const double z = 2.0 * uni() - 1.0;
        samples.push_back({0.0, x, y, z});
    }
    const int subdiv = static_cast<int>(as_size(cfg.integer("subdivisions"), "subdivisions"));
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = quantization_scan(d, {cfg.real("alpha"), 0.0}, as_size(cfg.integer("K"), "K", 0),
                                        static_cast<int>(as_size(cfg.integer("n_max"), "n_max", 0)), subdiv,
                                        samples, cfg.real("path_step"));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    CsvWriter csv(ctx.file("scan.csv"), {"p", "defect", "certificate", "is_quantized"});
    double worst_quantized = 0.0;
    double least_midpoint = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const auto& r = rows[j];
        csv.row({r.p, r.defect, r.certificate, std::int64_t{r.is_quantized ? 1 : 0}});
        const double ratio = r.defect / r.certificate;
        if (r.is_quantized) worst_quantized = std::max(worst_quantized, ratio);
        if (j % static_cast<std::size_t>(2 * subdiv) == static_cast<std::size_t>(subdiv)) {
            least_midpoint = std::min(least_midpoint, ratio);
        }
    }
    ctx.checks.le("quantized defect / certificate (max)", worst_quantized, cfg.real("quantized_factor"));
    ctx.checks.ge("midpoint defect / certificate (min)", least_midpoint, cfg.real("midpoint_factor"));
    ctx.checks.le("scan runtime seconds", seconds, cfg.real("runtime_limit"));
}

void run_two_wall(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const double d = cfg.real("d");
    const double p = 2.0 * kPi * static_cast<double>(cfg.integer("n")) / d;
    const double E = std::sqrt(1.0 + p * p);
    const TrainSpec spec{d, p / E, {cfg.real("alpha"), 0.0}, as_size(cfg.integer("K"), "K", 0)};
    spec.validate();
    const std::size_t n = as_size(cfg.integer("samples"), "samples", 2);

    CsvWriter csv(ctx.file("two_wall.csv"), {"x", "sheet", "unfolded", "re_S", "im_S"});
    bool involution = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 0.5 * d * static_cast<double>(i) / static_cast<double>(n - 1);
        for (const Sheet sheet : {Sheet::upper, Sheet::lower}) {
            const double y = fold_two_wall(x, sheet, d);
            const StripPoint back = unfold_to_strip(y, d);
            const bool wall = x == 0.0 || x == 0.5 * d;
            involution = involution && back.x == x && (wall || back.sheet == sheet);
            const auto s = two_wall_action(spec, {x, sheet}, 0.0, 0.0, 0.0, E, p);
            csv.row({x, std::int64_t{sheet == Sheet::upper ? 1 : -1}, y, s.value.real(), s.value.imag()});
        }
    }
    ctx.checks.holds("fold then unfold is the identity", involution);
    const bool fixed = fold_two_wall(0.0, Sheet::lower, d) == 0.0 && fold_two_wall(0.5 * d, Sheet::lower, d) == 0.5 * d;
    ctx.checks.holds("walls are fixed points of both sheets", fixed);
    const double step = 1e-3 * d;
    const double slope = (fold_two_wall(0.25 * d + step, Sheet::lower, d) - fold_two_wall(0.25 * d, Sheet::lower, d)) / step;
    ctx.checks.within("lower-sheet velocity factor", slope * fold_orientation(Sheet::upper), -1.0, 1e-9);

    // Continuity of the shuttling action across both walls.
    const std::vector<SpacetimePoint> walls{{0.0, 0.0, 0.0, 0.0}, {0.0, 0.5 * d, 0.0, 0.0}};
    const double defect = periodicity_defect(spec, E, p, walls, cfg.real("path_step"));
    ctx.checks.le("wall continuity defect / certificate", defect / spec.certificate(), cfg.real("quantized_factor"));
}

double angular_distance(double a, double b) {
    const double diff = std::remainder(a - b, 2.0 * kPi);
    return std::abs(diff);
}

void run_torus(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto samples = as_size(cfg.integer("samples"), "samples", 3);
    const double cell = 2.0 * kPi / static_cast<double>(samples);
    CsvWriter csv(ctx.file("torus.csv"), {"n", "t", "angle", "expected_angle", "winding", "expected_winding"});
    for (const auto n : cfg.integers("modes")) {
        TorusSpec spec{cfg.real("R"), cfg.real("d_duct"), static_cast<int>(n), {cfg.real("alpha"), 0.0}};
        spec.validate();
        const double expected_w = 2.0 * kPi * static_cast<double>(n);
        const double w = torus_winding(spec, 0.0, samples);
        double worst = 0.0;
        for (const double t : cfg.reals("times")) {
            const double angle = torus_envelope_angle(spec, t, samples);
            const double expected = std::fmod(spec.v_phi() * t / spec.R, 2.0 * kPi);
            worst = std::max(worst, angular_distance(angle, expected));
            csv.row({n, t, angle, expected, w, expected_w});
        }
        const std::string tag = "n=" + std::to_string(n) + " ";
        ctx.checks.le(tag + "winding relative error", std::abs(w / expected_w - 1.0), cfg.real("winding_tolerance"));
        ctx.checks.le(tag + "envelope tracking error (cells)", worst / cell, cfg.real("tracking_cells"));
    }
}

// ---------------------------------------------------------------- semiclassical

struct Harmonic {
    double omega, p0, theta;

    double a(double t) const { return -omega * std::tan(omega * t - theta); }
    double b(double t) const { return p0 * std::cos(theta) / std::cos(omega * t - theta); }
    double c(double t) const {
        const double ct = std::cos(theta);
        return -(p0 * p0 * ct * ct / (2.0 * omega)) * (std::tan(omega * t - theta) + std::tan(theta));
    }
    double action(double t, double x) const { return c(t) + b(t) * x + 0.5 * a(t) * x * x; }
    Complex sigma(double t, double hbar) const {
        return -kI * hbar * (std::log(std::cos(omega * t - theta)) - std::log(std::cos(theta)));
    }
};

// Direct method-of-lines integration of
//   dS/dt + (dS/dx)^2 / 2 + U = -i hbar d^2 S_c / dx^2
// on a fine 1D grid with RK4; returns sigma = S - S_c at the requested levels.
std::vector<std::vector<Complex>> direct_sigma(const Harmonic& hm, double hbar, double x_half, std::size_t nx,
                                               double dt, std::size_t steps_per_level, std::size_t levels,
                                               std::vector<double>& xs) {
    const double h = 2.0 * x_half / static_cast<double>(nx - 1);
    xs.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) xs[i] = -x_half + static_cast<double>(i) * h;
    auto d1 = [&](const std::vector<Complex>& f, std::size_t i) {
        if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        if (i == nx - 1) return (3.0 * f[nx - 1] - 4.0 * f[nx - 2] + f[nx - 3]) / (2.0 * h);
        return (f[i + 1] - f[i - 1]) / (2.0 * h);
    };
    auto d2 = [&](const std::vector<double>& f, std::size_t i) {
        if (i == 0) return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
        if (i == nx - 1) return (2.0 * f[nx - 1] - 5.0 * f[nx - 2] + 4.0 * f[nx - 3] - f[nx - 4]) / (h * h);
        return (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    };
    std::vector<double> sc(nx);
    auto rhs = [&](double t, const std::vector<Complex>& S) {
        for (std::size_t i = 0; i < nx; ++i) sc[i] = hm.action(t, xs[i]);
        std::vector<Complex> out(nx);
        for (std::size_t i = 0; i < nx; ++i) {
            const Complex g = d1(S, i);
            out[i] = -0.5 * g * g - 0.5 * hm.omega * hm.omega * xs[i] * xs[i] - kI * hbar * d2(sc, i);
        }
        return out;
    };
    std::vector<Complex> S(nx);
    for (std::size_t i = 0; i < nx; ++i) S[i] = hm.action(0.0, xs[i]);
    std::vector<std::vector<Complex>> out;
    auto record = [&](double t) {
        std::vector<Complex> sig(nx);
        for (std::size_t i = 0; i < nx; ++i) sig[i] = S[i] - hm.action(t, xs[i]);
        out.push_back(std::move(sig));
    };
    double t = 0.0;
    record(t);
    std::vector<Complex> tmp(nx);
    for (std::size_t lvl = 1; lvl < levels; ++lvl) {
        for (std::size_t s = 0; s < steps_per_level; ++s) {
            const auto k1 = rhs(t, S);
            for (std::size_t i = 0; i < nx; ++i) tmp[i] = S[i] + 0.5 * dt * k1[i];
            const auto k2 = rhs(t + 0.5 * dt, tmp);
            for (std::size_t i = 0; i < nx; ++i) tmp[i] = S[i] + 0.5 * dt * k2[i];
            const auto k3 = rhs(t + 0.5 * dt, tmp);
            for (std::size_t i = 0; i < nx; ++i) tmp[i] = S[i] + dt * k3[i];
            const auto k4 = rhs(t + dt, tmp);
            for (std::size_t i = 0; i < nx; ++i) S[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            t = static_cast<double>(lvl - 1) * dt * static_cast<double>(steps_per_level) +
                static_cast<double>(s + 1) * dt;
        }
        record(t);
    }
    return out;
}

Complex interpolate(const std::vector<double>& xs, const std::vector<Complex>& f, double x) {
    const double h = xs[1] - xs[0];
    const double u = (x - xs.front()) / h;
    auto i = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0, static_cast<double>(xs.size() - 2)));
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * f[i] + w * f[i + 1];
}

void semiclassical_classical_part(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const double g = cfg.real("g");
    const double p0 = cfg.real("p0");
    const auto levels = sizes(cfg.integers("levels"), "levels", 3);
    const double half = cfg.real("half_extent");
    const double T = cfg.real("time_extent");
    const auto free_pot = EMPotential::none();
    const auto field_pot = EMPotential::uniform_field(g);

    CsvWriter csv(ctx.file("classical_residual.csv"), {"points", "h", "dt", "free_linf", "uniform_linf", "uniform_l2"});
    std::vector<LevelRow> rows;
    double free_worst = 0.0;
    for (const auto n : levels) {
        const double h = 2.0 * half / static_cast<double>(n - 1);
        const double dt = T / static_cast<double>(n - 1);
        const Grid grid({{Axis::t, n, 0.0, dt}, {Axis::x, n, -half, h}});
        const auto free_field = eval_on_grid(
            [p0](const SpacetimePoint& pt) { return Complex(free_classical_action({p0, 0.0, 0.0}, pt)); }, grid);
        const auto uni_field = eval_on_grid(
            [g, p0](const SpacetimePoint& pt) { return Complex(uniform_field_classical_action(g, p0, pt)); }, grid);
        const auto rf = classical_action_residual(free_field, free_pot, StencilSpec{2, {}});
        const auto ru = classical_action_residual(uni_field, field_pot, StencilSpec{2, {}});
        free_worst = std::max(free_worst, rf.linf);
        rows.push_back({n, h, dt, ru.linf, ru.l2});
        csv.row({static_cast<std::int64_t>(n), h, dt, rf.linf, ru.linf, ru.l2});
    }
    ctx.checks.le("free classical residual", free_worst, 1e-12);
    check_convergence(ctx, "uniform-field ", rows, 2.0, cfg.real("order_tolerance"));

    // p(t) from the trajectory against grad S_c of the closed form.
    const double t_end = std::min(T, 100.0);
    const auto tr = integrate_trajectory(field_pot, {0.0, 0.0, 0.0}, {p0, 0.0, 0.0}, 0.0, t_end,
                                         cfg.real("trajectory_dt"));
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) worst = std::max(worst, std::abs(tr.momenta[i].x - (p0 + g * tr.times[i])));
    ctx.checks.le("trajectory p vs grad S_c (uniform field)", worst, 1e-6);
}

void semiclassical_correction_part(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const double w = cfg.real("omega0");
    const double beta = cfg.real("beta");
    const double p0 = cfg.real("p0");
    const double hbar = cfg.real("hbar");
    const Harmonic hm{w, p0, std::atan(beta / w)};
    const double T = cfg.real("t_final");
    const double x_half = cfg.real("x_half");
    const auto nx = as_size(cfg.integer("nx"), "nx", 5);
    const auto nt = as_size(cfg.integer("nt"), "nt", 4);
    const double dt = T / static_cast<double>(nt - 1);
    const double hx = 2.0 * x_half / static_cast<double>(nx - 1);
    const auto pot = EMPotential::harmonic(w);

    const Grid grid({{Axis::t, nt, 0.0, dt}, {Axis::x, nx, -x_half, hx}});
    const auto sc_field =
        eval_on_grid([&hm](const SpacetimePoint& pt) { return Complex(hm.action(pt.t, pt.x)); }, grid);
    const auto corrected = semiclassical_correction(sc_field, pot, StencilSpec{2, {}}, hbar);

    const double odt = cfg.real("oracle_dt");
    const auto per_level = static_cast<std::size_t>(std::llround(dt / odt));
    if (per_level == 0 || std::abs(static_cast<double>(per_level) * odt - dt) > 1e-9 * dt) {
        throw ConfigError("semiclassical: oracle_dt must divide the grid time step");
    }
    std::vector<double> oxs;
    const auto oracle = direct_sigma(hm, hbar, x_half, as_size(cfg.integer("oracle_nx"), "oracle_nx", 5), odt,
                                     per_level, nt, oxs);

    CsvWriter csv(ctx.file("sigma.csv"), {"t", "x", "im_sigma_transport", "im_sigma_direct", "im_sigma_closed_form"});
    double worst = 0.0, worst_closed = 0.0;
    std::size_t valid = 0;
    const std::size_t centre = (nx - 1) / 2;
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t flat = k * nx + i;
            if (!corrected.valid[flat]) continue;
            ++valid;
            const SpacetimePoint pt = grid.point(flat);
            const Complex sig = corrected.s_sc[flat] - sc_field[flat];
            const Complex direct = interpolate(oxs, oracle[k], pt.x);
            const Complex closed = hm.sigma(pt.t, hbar);
            if (k > 0) {
                worst = std::max(worst, std::abs(sig - direct) / std::abs(direct));
                worst_closed = std::max(worst_closed, std::abs(direct - closed) / std::abs(closed));
            }
            if (i == centre) csv.row({pt.t, pt.x, sig.imag(), direct.imag(), closed.imag()});
        }
    }
    const double coverage = static_cast<double>(valid) / static_cast<double>(grid.size());
    ctx.checks.ge("transport coverage of the grid", coverage, 0.5);
    ctx.checks.le("transported sigma vs direct integration (rel)", worst, cfg.real("rel_tolerance"));
    ctx.checks.le("direct integration vs closed form (rel)", worst_closed, cfg.real("rel_tolerance"));

    TrajectoryOptions topt;
    topt.initial_hessian[0].x = beta;
    topt.initial_action = Complex(hm.action(0.0, 0.0));
    topt.hbar = hbar;
    const auto tr = integrate_trajectory(pot, {0.0, 0.0, 0.0}, {p0, 0.0, 0.0}, 0.0, T, cfg.real("trajectory_dt"), topt);
    CsvWriter tcsv(ctx.file("trajectory.csv"), {"t", "x", "y", "z", "px", "py", "pz", "re_S", "im_S"});
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto& x = tr.positions[i];
        const auto& p = tr.momenta[i];
        tcsv.row({tr.times[i], x.x, x.y, x.z, p.x, p.y, p.z, tr.action[i].real(), tr.action[i].imag()});
    }
    const Complex end_direct = interpolate(oxs, oracle.back(), tr.positions.back().x);
    ctx.checks.le("trajectory sigma vs direct integration (rel)",
                  std::abs(tr.sigma.back() - end_direct) / std::abs(end_direct), cfg.real("rel_tolerance"));
}

void semiclassical_frequency_part(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const BreatherSpec spec = breather_from(cfg, 0.0);
    const auto periods = as_size(cfg.integer("periods"), "periods");
    const std::size_t per_period = 64;
    const std::size_t n = periods * per_period;
    const double T = 2.0 * kPi * static_cast<double>(periods);
    const double tol = cfg.real("rate_tolerance");

    CsvWriter csv(ctx.file("frequency_lock.csv"), {"U", "phase_rate", "mean_dS_dt", "expected_dS_dt"});
    std::optional<double> base_rate;
    for (const double u : cfg.reals("potentials")) {
        const auto pot = EMPotential::constant(u);
        std::vector<Complex> S(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = T * static_cast<double>(k) / static_cast<double>(n);
            S[k] = slowly_varying_breather_action(pot, spec, {t, 0.0, 0.0, 0.0}).value;
        }
        // Whole periods: the oscillating part cancels from the mean rate.
        const double mean = (S[n] - S[0]).real() / T;
        std::vector<Complex> osc(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = T * static_cast<double>(k) / static_cast<double>(n);
            osc[k] = std::exp(kI * (S[k] - mean * t)) - 1.0;
        }
        const auto phase = action_from_psi(osc);
        const double rate = -(phase.back().value.real() - phase.front().value.real()) / T;
        const double expected = -(1.0 + pot.charge() * u);
        csv.row({u, rate, mean, expected});
        std::ostringstream tag;
        tag << "U=" << u << " ";
        ctx.checks.within(tag.str() + "breather phase rate", rate, 1.0, tol);
        ctx.checks.within(tag.str() + "mean dS/dt", mean, expected, tol);
        if (!base_rate) {
            base_rate = mean + pot.charge() * u;
        } else {
            ctx.checks.within(tag.str() + "dS/dt shift equals -eU", mean - *base_rate, -pot.charge() * u, tol);
        }
    }
}

void run_semiclassical(Context& ctx) {
    semiclassical_classical_part(ctx);
    semiclassical_correction_part(ctx);
    semiclassical_frequency_part(ctx);
}

// ---------------------------------------------------------------- advection

void run_advect(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const double v = cfg.real("v");
    if (!(std::abs(v) < 1.0)) throw ConfigError("advect: |v| must be below 1");
    const double p = v / std::sqrt(1.0 - v * v);
    const auto bg = PlaneWaveSpec::on_shell({p, 0.0, 0.0});
    const double width = cfg.real("width");
    const RealFunction s0 = [width](const Vec3& x) { return std::exp(-(x.x * x.x) / (width * width)); };
    const double half = cfg.real("half_extent");
    AdvectionOptions opt;
    opt.cfl = cfg.real("cfl");

    CsvWriter csv(ctx.file("advect.csv"), {"points", "h", "dt", "l2_deviation", "linf_deviation", "amplitude_drift", "order_l2"});
    std::vector<double> hs, es;
    double drift = 0.0;
    const auto levels = sizes(cfg.integers("levels"), "levels", 3);
    for (const auto n : levels) {
        const double h = 2.0 * half / static_cast<double>(n - 1);
        const auto rep = advect_check(bg, s0, Grid({{Axis::x, n, -half, h}}), cfg.real("t_final"), opt);
        Cell order;
        if (!hs.empty()) order = observed_order(hs.back(), es.back(), h, rep.l2_deviation);
        hs.push_back(h);
        es.push_back(rep.l2_deviation);
        drift = rep.amplitude_drift;
        csv.row({static_cast<std::int64_t>(n), h, rep.dt, rep.l2_deviation, rep.linf_deviation, rep.amplitude_drift, order});
    }
    const auto orders = pairwise_orders(hs, es);
    for (std::size_t i = 0; i < orders.size(); ++i) {
        ctx.checks.ge("order " + std::to_string(levels[i]) + "->" + std::to_string(levels[i + 1]), orders[i],
                      cfg.real("order_min"));
    }
    ctx.checks.le("amplitude drift at finest grid", drift, cfg.real("drift_max"));
}

// ---------------------------------------------------------------- manifest

nlohmann::json to_json(const Value& v) {
    return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

void write_manifest(const ExperimentConfig& cfg, const RunResult& r, const fs::path& dir) {
    nlohmann::json m;
    m["experiment"] = std::string(to_string(cfg.experiment));
    m["seed"] = cfg.seed;
    m["code_version"] = code_version();
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : cfg.parameters) params[k] = to_json(v);
    m["config"] = params;
    m["defaults_applied"] = cfg.defaulted;
    m["workers"] = workers();
    m["wall_time_seconds"] = r.wall_seconds;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& a : r.assertions) {
        nlohmann::json j{{"name", a.name},       {"passed", a.passed},     {"measured", a.measured},
                         {"relation", a.relation}, {"threshold", a.threshold}};
        if (a.relation == "within" || a.relation == "==") j["target"] = a.target;
        list.push_back(j);
    }
    m["assertions"] = list;
    m["outputs"] = r.outputs;
    m["passed"] = r.passed();
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write manifest in " + dir.string());
    out << m.dump(2) << '\n';
}

}  // namespace

bool RunResult::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

std::vector<std::string> RunResult::failures() const {
    std::vector<std::string> out;
    for (const auto& a : assertions) {
        if (!a.passed) out.push_back(a.name);
    }
    return out;
}

std::string code_version() { return BREATHER_VERSION; }

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    RunResult result;
    result.experiment = config.experiment;
    Context ctx{config, out_dir, result, Checks(result.assertions)};
    const auto t0 = std::chrono::steady_clock::now();
    switch (config.experiment) {
        case Experiment::residual: run_residual(ctx); break;
        case Experiment::evolve: run_evolve(ctx); break;
        case Experiment::boost_check: run_boost_check(ctx); break;
        case Experiment::quantize_scan: run_quantize_scan(ctx); break;
        case Experiment::two_wall: run_two_wall(ctx); break;
        case Experiment::torus: run_torus(ctx); break;
        case Experiment::semiclassical: run_semiclassical(ctx); break;
        case Experiment::advect: run_advect(ctx); break;
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.outputs.push_back("manifest.json");
    write_manifest(config, result, out_dir);
    return result;
}

}  // namespace breather::lab
