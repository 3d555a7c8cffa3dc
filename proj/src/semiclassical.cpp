#include "breather/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "breather/errors.hpp"
#include "breather/special_functions.hpp"

namespace breather {

namespace {

constexpr Complex kI{0.0, 1.0};

double& comp(Vec3& v, int i) { return i == 0 ? v.x : (i == 1 ? v.y : v.z); }
double comp(const Vec3& v, int i) { return i == 0 ? v.x : (i == 1 ? v.y : v.z); }

Vec3 unit(int i) {
    Vec3 e{};
    comp(e, i) = 1.0;
    return e;
}

Mat3 identity() { return {unit(0), unit(1), unit(2)}; }

double det(const Mat3& m) {
    return m[0].x * (m[1].y * m[2].z - m[1].z * m[2].y) - m[0].y * (m[1].x * m[2].z - m[1].z * m[2].x) +
           m[0].z * (m[1].x * m[2].y - m[1].y * m[2].x);
}

// tr(K J^-1) via the adjugate of J.
double trace_k_jinv(const Mat3& K, const Mat3& J) {
    const double d = det(J);
    Mat3 adj{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
            const int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
            comp(adj[i], j) = comp(J[i1], j1) * comp(J[i2], j2) - comp(J[i1], j2) * comp(J[i2], j1);
        }
    }
    double tr = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) tr += comp(K[i], k) * comp(adj[k], i);
    }
    return tr / d;
}

struct PhaseState {
    Vec3 x;
    Vec3 p;
    double s = 0.0;      // accumulated action
    double lap_int = 0.0;  // integral of lap S_c
    Mat3 J{};
    Mat3 K{};
};

PhaseState axpy(const PhaseState& y, double h, const PhaseState& k) {
    PhaseState r = y;
    r.x += h * k.x;
    r.p += h * k.p;
    r.s += h * k.s;
    r.lap_int += h * k.lap_int;
    for (int i = 0; i < 3; ++i) {
        r.J[i] += h * k.J[i];
        r.K[i] += h * k.K[i];
    }
    return r;
}

struct Dynamics {
    const EMPotential& pot;
    double e;
    bool transport = true;

    Vec3 force(const Vec3& x, const Vec3& p, double t) const {
        const Vec3 v = p - e * pot.A(x, t);
        const auto G = pot.grad_A(x, t);
        Vec3 f = -e * pot.grad_U(x, t);
        for (int i = 0; i < 3; ++i) comp(f, i) += e * dot(G[i], v);
        return f;
    }

    struct Rates {
        PhaseState dy;
        Vec3 v;
        Vec3 f;
        double lagrangian;
        double lap;
    };

    Rates operator()(double t, const PhaseState& y) const {
        Rates r;
        const Vec3 A = pot.A(y.x, t);
        const double U = pot.U(y.x, t);
        r.v = y.p - e * A;
        r.f = pot.is_vacuum() ? Vec3{} : force(y.x, y.p, t);
        if (!isfinite(r.v) || !isfinite(r.f) || !std::isfinite(U)) {
            std::ostringstream os;
            os << "integrate_trajectory: non-finite potential at t=" << t << ", x=(" << y.x.x << ", " << y.x.y
               << ", " << y.x.z << ")";
            throw Error(os.str());
        }
        r.lagrangian = dot(y.p, r.v) - 0.5 * dot(r.v, r.v) - e * U;
        r.lap = transport ? trace_k_jinv(y.K, y.J) : 0.0;
        r.dy.x = r.v;
        r.dy.p = r.f;
        r.dy.s = r.lagrangian;
        r.dy.lap_int = r.lap;

        Mat3 dFdx{};  // rows i: d F_i / d x_j
        Mat3 G{};     // rows i: d A_j / d x_i
        if (!pot.is_vacuum()) {
            G = pot.grad_A(y.x, t);
            const double h = EMPotential::kDerivativeStep;
            for (int j = 0; j < 3; ++j) {
                const Vec3 ej = unit(j);
                const Vec3 d = (-1.0 * force(y.x + 2.0 * h * ej, y.p, t) + 8.0 * force(y.x + h * ej, y.p, t) -
                                8.0 * force(y.x - h * ej, y.p, t) + force(y.x - 2.0 * h * ej, y.p, t)) *
                               (1.0 / (12.0 * h));
                for (int i = 0; i < 3; ++i) comp(dFdx[i], j) = comp(d, i);
            }
        }
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) {
                double dj = comp(y.K[i], k);
                double dk = 0.0;
                for (int j = 0; j < 3; ++j) {
                    dj -= e * comp(G[j], i) * comp(y.J[j], k);
                    dk += comp(dFdx[i], j) * comp(y.J[j], k) + e * comp(G[i], j) * comp(y.K[j], k);
                }
                comp(r.dy.J[i], k) = dj;
                comp(r.dy.K[i], k) = dk;
            }
        }
        return r;
    }
};

template <typename T>
T hermite(double s, double h, const T& y0, const T& d0, const T& y1, const T& d1) {
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * y0 + (h10 * h) * d0 + h01 * y1 + (h11 * h) * d1;
}

}  // namespace

Trajectory::State Trajectory::at(double t) const {
    if (times.empty() || !(t >= times.front() && t <= times.back())) {
        throw InvalidInput("Trajectory::at: time outside the integrated span");
    }
    if (times.size() == 1) return {positions[0], velocities[0], momenta[0], action[0], sigma[0]};
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = it == times.end() ? times.size() - 2 : static_cast<std::size_t>(it - times.begin()) - 1;
    const double h = times[i + 1] - times[i];
    const double s = (t - times[i]) / h;
    State st;
    st.x = hermite(s, h, positions[i], velocities[i], positions[i + 1], velocities[i + 1]);
    st.p = hermite(s, h, momenta[i], forces[i], momenta[i + 1], forces[i + 1]);
    // Velocity from the derivative of the position interpolant.
    const double s2 = s * s;
    const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1, d01 = (-6 * s2 + 6 * s) / h,
                 d11 = 3 * s2 - 2 * s;
    st.v = d00 * positions[i] + d10 * velocities[i] + d01 * positions[i + 1] + d11 * velocities[i + 1];
    st.action = hermite(s, h, action[i], Complex(lagrangian[i]), action[i + 1], Complex(lagrangian[i + 1]));
    st.sigma = hermite(s, h, sigma[i], -kI * hbar * laplacian[i], sigma[i + 1], -kI * hbar * laplacian[i + 1]);
    return st;
}

Trajectory integrate_trajectory(const EMPotential& pot, const Vec3& x0, const Vec3& p0, double t0, double t1,
                                double dt, const TrajectoryOptions& options) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("integrate_trajectory: dt must be positive");
    if (!(t1 > t0)) throw InvalidInput("integrate_trajectory: need t1 > t0");
    if (dt > pot.scale() / 100.0) throw InvalidInput("integrate_trajectory: dt exceeds L/100");
    if (norm(p0) > options.max_momentum) {
        throw InvalidInput("integrate_trajectory: |p0| exceeds the nonrelativistic cap");
    }
    if (!isfinite(x0) || !isfinite(p0)) throw InvalidInput("integrate_trajectory: non-finite initial data");

    const Dynamics dyn{pot, pot.charge(), options.transport_correction};
    PhaseState y;
    y.x = x0;
    y.p = p0;
    y.J = identity();
    y.K = options.initial_hessian;
    const Complex s0 = options.initial_action.value_or(Complex(dot(p0, x0), 0.0));

    Trajectory tr;
    tr.hbar = options.hbar;
    auto record = [&](double t, const PhaseState& st, const Dynamics::Rates& r) {
        tr.times.push_back(t);
        tr.positions.push_back(st.x);
        tr.velocities.push_back(r.v);
        tr.momenta.push_back(st.p);
        tr.forces.push_back(r.f);
        tr.action.push_back(s0 + st.s);
        tr.lagrangian.push_back(r.lagrangian);
        tr.sigma.push_back(-kI * options.hbar * st.lap_int);
        tr.laplacian.push_back(r.lap);
        tr.jacobian.push_back(det(st.J));
    };

    double t = t0;
    record(t, y, dyn(t, y));
    std::size_t step = 0;
    while (t < t1) {
        const double h = std::min(dt, t1 - t);
        const auto k1 = dyn(t, y).dy;
        const auto k2 = dyn(t + 0.5 * h, axpy(y, 0.5 * h, k1)).dy;
        const auto k3 = dyn(t + 0.5 * h, axpy(y, 0.5 * h, k2)).dy;
        const auto k4 = dyn(t + h, axpy(y, h, k3)).dy;
        PhaseState next = axpy(y, h / 6.0, k1);
        next = axpy(next, h / 3.0, k2);
        next = axpy(next, h / 3.0, k3);
        next = axpy(next, h / 6.0, k4);
        ++step;
        const double det_prev = det(y.J);
        const double det_next = det(next.J);
        if (options.transport_correction && !(det_next * det_prev > 0.0)) {
            std::ostringstream os;
            os << "integrate_trajectory: det(dx/dx0) changed sign at step " << step << " (t=" << t + h << ")";
            throw CausticError(os.str(), {step});
        }
        y = next;
        t = (t1 - t - h <= 1e-14 * std::max(1.0, std::abs(t1))) ? t1 : t + h;
        record(t, y, dyn(t, y));
    }
    return tr;
}

namespace {

// Gradient and Laplacian of Re S_c on every node of the grid, with a flag for
// nodes where the stencil fits in space.
struct Derivatives {
    std::size_t ns;
    std::vector<double> grad;  // node * ns + c
    std::vector<double> lap;
    std::vector<std::uint8_t> inside;
};

Derivatives derivatives(const ComplexField& f, const StencilSpec& stencil) {
    const Grid& g = f.grid;
    const std::size_t ns = g.rank() - 1;
    const int hw = stencil.half_width();
    const auto& w1 = first_derivative_weights(stencil.order);
    const auto& w2 = second_derivative_weights(stencil.order);
    Derivatives d{ns, std::vector<double>(g.size() * ns, 0.0), std::vector<double>(g.size(), 0.0),
                  std::vector<std::uint8_t>(g.size(), 0)};
    const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t fi = 0; fi < n; ++fi) {
        const auto flat = static_cast<std::size_t>(fi);
        std::array<std::size_t, 4> idx{};
        g.unravel(flat, std::span(idx.data(), g.rank()));
        bool ok = true;
        for (std::size_t a = 1; a < g.rank(); ++a) {
            const auto hwu = static_cast<std::size_t>(hw);
            ok = ok && idx[a] >= hwu && idx[a] + hwu < g.axis(a).count;
        }
        if (!ok) continue;
        d.inside[flat] = 1;
        double lap = 0.0;
        for (std::size_t a = 1; a < g.rank(); ++a) {
            const double h = g.axis(a).spacing;
            const std::size_t st = g.stride(a);
            double s1 = 0.0, s2 = 0.0;
            for (int k = -hw; k <= hw; ++k) {
                const double v = f.values[flat + static_cast<std::size_t>(k) * st].real();
                s1 += w1[static_cast<std::size_t>(k + hw)] * v;
                s2 += w2[static_cast<std::size_t>(k + hw)] * v;
            }
            d.grad[flat * ns + (a - 1)] = s1 / h;
            lap += s2 / (h * h);
        }
        d.lap[flat] = lap;
    }
    return d;
}

class Interpolator {
public:
    Interpolator(const Grid& g, const Derivatives& d) : g_(g), d_(d) {
        for (std::size_t a = 1; a < g.rank(); ++a) {
            lo_.push_back(g.axis(a).origin);
            h_.push_back(g.axis(a).spacing);
            n_.push_back(g.axis(a).count);
        }
    }

    // Gradient (ns components) and Laplacian at (t, x); false when any
    // supporting node lacks derivatives.
    bool operator()(double t, const std::array<double, 3>& x, std::array<double, 3>& grad, double& lap) const {
        const std::size_t ns = d_.ns;
        const auto& ta = g_.axis(0);
        const std::size_t nt = ta.count;
        double ut = (t - ta.origin) / ta.spacing;
        auto m = static_cast<std::ptrdiff_t>(std::floor(ut));
        m = std::clamp<std::ptrdiff_t>(m - 1, 0, static_cast<std::ptrdiff_t>(nt) - 4);
        const double u = ut - static_cast<double>(m);
        std::array<double, 4> wt{};
        for (int i = 0; i < 4; ++i) {
            double w = 1.0;
            for (int j = 0; j < 4; ++j) {
                if (j != i) w *= (u - j) / static_cast<double>(i - j);
            }
            wt[static_cast<std::size_t>(i)] = w;
        }
        std::array<std::size_t, 3> base{};
        std::array<double, 3> frac{};
        for (std::size_t a = 0; a < ns; ++a) {
            const double us = (x[a] - lo_[a]) / h_[a];
            if (!(us >= 0.0 && us <= static_cast<double>(n_[a] - 1))) return false;
            auto b = static_cast<std::size_t>(std::floor(us));
            if (b + 1 >= n_[a]) b = n_[a] - 2;
            base[a] = b;
            frac[a] = us - static_cast<double>(b);
        }
        grad.fill(0.0);
        lap = 0.0;
        const std::size_t corners = std::size_t{1} << ns;
        for (int i = 0; i < 4; ++i) {
            const std::size_t level = static_cast<std::size_t>(m + i) * g_.stride(0);
            for (std::size_t c = 0; c < corners; ++c) {
                double w = wt[static_cast<std::size_t>(i)];
                std::size_t flat = level;
                for (std::size_t a = 0; a < ns; ++a) {
                    const std::size_t bit = (c >> a) & 1U;
                    w *= bit ? frac[a] : 1.0 - frac[a];
                    flat += (base[a] + bit) * g_.stride(a + 1);
                }
                if (!d_.inside[flat]) return false;
                for (std::size_t a = 0; a < ns; ++a) grad[a] += w * d_.grad[flat * ns + a];
                lap += w * d_.lap[flat];
            }
        }
        return true;
    }

private:
    const Grid& g_;
    const Derivatives& d_;
    std::vector<double> lo_, h_;
    std::vector<std::size_t> n_;
};

}  // namespace

SemiclassicalField semiclassical_correction(const ComplexField& classical_action, const EMPotential& pot,
                                            const StencilSpec& stencil, double hbar) {
    const Grid& g = classical_action.grid;
    stencil.validate();
    stencil.check_against(g);
    if (!g.has_time() || g.spatial_rank() == 0) {
        throw InvalidInput("semiclassical_correction: need a time axis and at least one spatial axis");
    }
    if (g.axis(0).count < 4) throw InvalidInput("semiclassical_correction: need at least four time levels");
    for (const auto& v : classical_action.values) {
        if (!std::isfinite(v.real())) throw InvalidInput("semiclassical_correction: non-finite S_c sample");
    }
    const std::size_t ns = g.spatial_rank();
    const std::size_t per_level = g.stride(0);
    const double dt = g.axis(0).spacing;
    const double e = pot.charge();

    const Derivatives d = derivatives(classical_action, stencil);
    const Interpolator interp(g, d);

    std::vector<Axis> labels;
    for (std::size_t a = 1; a < g.rank(); ++a) labels.push_back(g.axis(a).label);

    SemiclassicalField out{classical_action, std::vector<std::uint8_t>(g.size(), 0)};
    std::vector<double> feet(g.size() * ns, 0.0);

    auto velocity = [&](double t, const std::array<double, 3>& x, std::array<double, 3>& v, double& lap) {
        std::array<double, 3> grad{};
        if (!interp(t, x, grad, lap)) return false;
        if (pot.is_vacuum()) {
            v = grad;
            return true;
        }
        SpacetimePoint pt = g.base();
        pt.t = t;
        for (std::size_t a = 0; a < ns; ++a) pt[labels[a]] = x[a];
        const Vec3 A = pot.A(pt.position(), t);
        for (std::size_t a = 0; a < ns; ++a) {
            const double Aa = labels[a] == Axis::x ? A.x : (labels[a] == Axis::y ? A.y : A.z);
            v[a] = grad[a] - e * Aa;
        }
        return true;
    };

    const auto total = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t fi = 0; fi < total; ++fi) {
        const auto flat = static_cast<std::size_t>(fi);
        const std::size_t level = flat / per_level;
        const SpacetimePoint p0 = g.point(flat);
        std::array<double, 3> x{};
        for (std::size_t a = 0; a < ns; ++a) x[a] = p0[labels[a]];
        double integral = 0.0;
        bool ok = true;
        double t = p0.t;
        const double h = -dt;
        for (std::size_t s = 0; s < level && ok; ++s) {
            std::array<double, 3> k1{}, k2{}, k3{}, k4{}, xs{};
            double l1 = 0, l2 = 0, l3 = 0, l4 = 0;
            ok = velocity(t, x, k1, l1);
            for (std::size_t a = 0; ok && a < ns; ++a) xs[a] = x[a] + 0.5 * h * k1[a];
            ok = ok && velocity(t + 0.5 * h, xs, k2, l2);
            for (std::size_t a = 0; ok && a < ns; ++a) xs[a] = x[a] + 0.5 * h * k2[a];
            ok = ok && velocity(t + 0.5 * h, xs, k3, l3);
            for (std::size_t a = 0; ok && a < ns; ++a) xs[a] = x[a] + h * k3[a];
            ok = ok && velocity(t + h, xs, k4, l4);
            if (!ok) break;
            for (std::size_t a = 0; a < ns; ++a) x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            integral -= h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
            t = g.axis(0).coord(level - s - 1);
        }
        for (std::size_t a = 0; a < ns; ++a) feet[flat * ns + a] = x[a];
        if (ok) {
            out.valid[flat] = 1;
            out.s_sc.values[flat] += -kI * hbar * integral;
        }
    }

    // Jacobian of the foot-point map by one-sided differences.
    std::vector<std::size_t> caustic;
    for (std::size_t flat = per_level; flat < g.size(); ++flat) {
        if (!out.valid[flat]) continue;
        std::array<std::size_t, 4> idx{};
        g.unravel(flat, std::span(idx.data(), g.rank()));
        std::array<std::array<double, 3>, 3> jac{};
        bool ok = true;
        for (std::size_t a = 0; a < ns && ok; ++a) {
            const std::size_t st = g.stride(a + 1);
            const bool fwd = idx[a + 1] + 1 < g.axis(a + 1).count;
            const std::size_t nb = fwd ? flat + st : flat - st;
            if (!out.valid[nb]) {
                ok = false;
                break;
            }
            const double sign = fwd ? 1.0 : -1.0;
            for (std::size_t b = 0; b < ns; ++b) {
                jac[b][a] = sign * (feet[nb * ns + b] - feet[flat * ns + b]) / g.axis(a + 1).spacing;
            }
        }
        if (!ok) continue;
        double dj = 0.0;
        if (ns == 1) {
            dj = jac[0][0];
        } else if (ns == 2) {
            dj = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        } else {
            Mat3 m{};
            for (int i = 0; i < 3; ++i) m[i] = {jac[i][0], jac[i][1], jac[i][2]};
            dj = det(m);
        }
        if (!(dj > 0.0)) caustic.push_back(flat);
    }
    if (!caustic.empty()) {
        std::ostringstream os;
        os << "semiclassical_correction: characteristics cross at " << caustic.size() << " node(s), first at t="
           << g.point(caustic.front()).t;
        throw CausticError(os.str(), std::move(caustic));
    }
    return out;
}

ActionValue slowly_varying_breather_action(const EMPotential& pot, const BreatherSpec& spec,
                                           const SpacetimePoint& pt) {
    if (pot.scale() < EMPotential::kMinScale) throw InvalidInput("slowly_varying_breather_action: scale below 50");
    const ActionValue inner = breather_action(spec, pt);
    const Vec3 x = pt.position();
    const double e = pot.charge();
    const Complex shift = -e * pot.U(x, pt.t) * pt.t + e * dot(pot.A(x, pt.t), x);
    const Complex s = inner.value + shift;
    return {s, branch_of(s)};
}

ActionValue uniform_asymptotic_action(const EMPotential& pot, const Trajectory& traj, const BreatherSpec& spec,
                                      const SpacetimePoint& pt) {
    (void)pot;
    spec.validate();
    const auto st = traj.at(pt.t);
    const double v2 = dot(st.v, st.v);
    if (std::sqrt(v2) > 0.1) throw InvalidInput("uniform_asymptotic_action: |v| exceeds 0.1");
    const Vec3 x = pt.position();
    const Vec3 dx = x - st.x;
    const double r = norm(dx);
    if (r > 20.0) throw InvalidInput("uniform_asymptotic_action: point lies outside the inner region |x - x_p| <= 20");
    const Complex s_sc = st.action + dot(st.p, dx) + st.sigma;
    const double phase = -(1.0 + 0.5 * v2) * pt.t + dot(st.p, x);
    const Complex arg =
        1.0 + spec.alpha * Complex(std::cos(phase), std::sin(phase)) * spherical_bessel(0, std::sqrt(3.0) * r);
    if (arg == Complex(0.0, 0.0)) throw SingularPointError("uniform_asymptotic_action: Psi vanishes");
    const Complex s = -pt.t + s_sc - kI * std::log(arg);
    return {s, branch_of(s)};
}

double free_classical_action(const Vec3& p, const SpacetimePoint& pt) {
    return dot(p, pt.position()) - 0.5 * dot(p, p) * pt.t;
}

double uniform_field_classical_action(double g, double p0, const SpacetimePoint& pt) {
    if (g == 0.0) return p0 * pt.x - 0.5 * p0 * p0 * pt.t;
    const double p = p0 + g * pt.t;
    return p * pt.x - (p * p * p - p0 * p0 * p0) / (6.0 * g);
}

}  // namespace breather
