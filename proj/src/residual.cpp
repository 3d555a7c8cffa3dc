#include "breather/residual.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <cmath>
#include <sstream>

#include "breather/analytic.hpp"
#include "breather/errors.hpp"
#include "breather/kernels.hpp"

namespace breather {

namespace {

constexpr Complex kI{0.0, 1.0};

struct AxisStencil {
    std::size_t stride;
    double h;
    Axis label;
};

// Finite-difference context shared by the residual operators.
struct Differ {
    const std::vector<Complex>& f;
    std::vector<AxisStencil> axes;
    std::optional<std::size_t> time;
    int hw;
    const std::vector<double>& w1;
    const std::vector<double>& w2;

    Differ(const ComplexField& field, const StencilSpec& st)
        : f(field.values), time(field.grid.find(Axis::t)), hw(st.half_width()),
          w1(first_derivative_weights(st.order)), w2(second_derivative_weights(st.order)) {
        for (std::size_t i = 0; i < field.grid.rank(); ++i) {
            axes.push_back({field.grid.stride(i), field.grid.axis(i).spacing, field.grid.axis(i).label});
        }
    }

    Complex first(std::size_t flat, std::size_t a) const {
        const auto& ax = axes[a];
        Complex s{0.0, 0.0};
        for (int k = -hw; k <= hw; ++k) {
            const double w = w1[k + hw];
            if (w != 0.0) s += w * f[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(flat) + k * static_cast<std::ptrdiff_t>(ax.stride))];
        }
        return s / ax.h;
    }

    Complex second(std::size_t flat, std::size_t a) const {
        const auto& ax = axes[a];
        Complex s{0.0, 0.0};
        for (int k = -hw; k <= hw; ++k) {
            s += w2[k + hw] * f[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(flat) + k * static_cast<std::ptrdiff_t>(ax.stride))];
        }
        return s / (ax.h * ax.h);
    }
};

double component(const Vec3& v, Axis a) {
    switch (a) {
        case Axis::x: return v.x;
        case Axis::y: return v.y;
        case Axis::z: return v.z;
        default: return 0.0;
    }
}

void check_field(const ComplexField& field, const StencilSpec& stencil, const char* who) {
    stencil.check_against(field.grid);
    if (!field.grid.has_time() || field.grid.spatial_rank() == 0) {
        throw InvalidInput(std::string(who) + ": field must be sampled in time and at least one spatial axis");
    }
    for (const auto& a : field.grid.axes()) {
        if (a.count < static_cast<std::size_t>(stencil.order) + 1) {
            std::ostringstream os;
            os << who << ": axis '" << static_cast<char>(a.label) << "' has " << a.count << " points, need at least "
               << stencil.order + 1;
            throw InvalidInput(os.str());
        }
    }
    for (std::size_t i = 0; i < field.size(); ++i) {
        const Complex v = field.values[i];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw InvalidInput(std::string(who) + ": non-finite sample at index " + std::to_string(i));
        }
    }
}

ResidualReport report(const ComplexField& field, const StencilSpec& stencil, const kernels::FlatFunction& op,
                      Execution exec) {
    const auto layout = kernels::Layout::of(field.grid);
    const std::size_t margin = static_cast<std::size_t>(stencil.half_width());
    const kernels::Norms n = exec == Execution::parallel ? kernels::omp::interior_norms(layout, margin, op)
                                                         : kernels::serial::interior_norms(layout, margin, op);
    ResidualReport r;
    r.linf = n.linf;
    r.l2 = n.count > 0 ? std::sqrt(n.sum_sq / static_cast<double>(n.count)) : 0.0;
    r.grid = field.grid;
    r.interior_margin = margin;
    r.samples = n.count;
    return r;
}

void check_branch_continuity(const ComplexField& s) {
    const Grid& g = s.grid;
    std::vector<std::size_t> idx(g.rank());
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unravel(flat, idx);
        for (std::size_t a = 0; a < g.rank(); ++a) {
            if (idx[a] + 1 >= g.axis(a).count) continue;
            const double jump = s.values[flat + g.stride(a)].real() - s.values[flat].real();
            if (std::abs(jump) > std::numbers::pi) {
                const auto p = g.point(flat);
                std::ostringstream os;
                os << "qhj_residual: branch jump of " << jump << " along axis '" << static_cast<char>(g.axis(a).label)
                   << "' at (t=" << p.t << ", x=" << p.x << ", y=" << p.y << ", z=" << p.z << ")";
                throw ResolutionError(os.str());
            }
        }
    }
}

}  // namespace

ResidualReport kg_residual(const ComplexField& psi, const StencilSpec& stencil, const EMPotential* potentials,
                           Execution exec) {
    check_field(psi, stencil, "kg_residual");
    const Differ D(psi, stencil);
    const std::size_t ti = *D.time;
    const Grid& grid = psi.grid;
    const bool coupled = potentials != nullptr && !potentials->is_vacuum();

    auto op = [&](std::size_t flat) -> Complex {
        const Complex f = D.f[flat];
        Complex lap{0.0, 0.0};
        for (std::size_t a = 0; a < D.axes.size(); ++a) {
            if (a != ti) lap += D.second(flat, a);
        }
        const Complex ftt = D.second(flat, ti);
        if (!coupled) return ftt - lap + f;

        const SpacetimePoint p = grid.point(flat);
        const Vec3 x = p.position();
        const double e = potentials->charge();
        const double u = potentials->U(x, p.t);
        const Vec3 A = potentials->A(x, p.t);
        const Complex ft = D.first(flat, ti);
        Complex a_grad{0.0, 0.0};
        for (std::size_t a = 0; a < D.axes.size(); ++a) {
            if (a != ti) a_grad += component(A, D.axes[a].label) * D.first(flat, a);
        }
        const Complex time_part = ftt + 2.0 * kI * e * u * ft + kI * e * potentials->dU_dt(x, p.t) * f - e * e * u * u * f;
        const Complex space_part = lap - 2.0 * kI * e * a_grad - kI * e * potentials->div_A(x, p.t) * f -
                                   e * e * dot(A, A) * f;
        return time_part - space_part + f;
    };
    return report(psi, stencil, op, exec);
}

ResidualReport qhj_residual(const ComplexField& action, const StencilSpec& stencil, const EMPotential* potentials,
                            Execution exec) {
    check_field(action, stencil, "qhj_residual");
    check_branch_continuity(action);
    const Differ D(action, stencil);
    const std::size_t ti = *D.time;
    const Grid& grid = action.grid;
    const bool coupled = potentials != nullptr && !potentials->is_vacuum();

    auto op = [&](std::size_t flat) -> Complex {
        double eu = 0.0;
        Vec3 eA{};
        if (coupled) {
            const SpacetimePoint p = grid.point(flat);
            eu = potentials->charge() * potentials->U(p.position(), p.t);
            eA = potentials->A(p.position(), p.t) * potentials->charge();
        }
        const Complex st = D.first(flat, ti) + eu;
        Complex kinetic = st * st;
        Complex box = D.second(flat, ti);
        Vec3 missing = eA;  // components along axes that are not sampled
        for (std::size_t a = 0; a < D.axes.size(); ++a) {
            if (a == ti) continue;
            const Axis label = D.axes[a].label;
            const Complex g = D.first(flat, a) - component(eA, label);
            kinetic -= g * g;
            box -= D.second(flat, a);
            if (label == Axis::x) missing.x = 0.0;
            if (label == Axis::y) missing.y = 0.0;
            if (label == Axis::z) missing.z = 0.0;
        }
        kinetic -= dot(missing, missing);
        return kinetic - 1.0 - kI * box;
    };
    return report(action, stencil, op, exec);
}

ResidualReport classical_action_residual(const ComplexField& action, const EMPotential& pot,
                                         const StencilSpec& stencil, Execution exec) {
    check_field(action, stencil, "classical_action_residual");
    const Differ D(action, stencil);
    const std::size_t ti = *D.time;
    const Grid& grid = action.grid;

    auto op = [&](std::size_t flat) -> Complex {
        const SpacetimePoint p = grid.point(flat);
        const double e = pot.charge();
        const Vec3 eA = pot.A(p.position(), p.t) * e;
        Complex kinetic{0.0, 0.0};
        Vec3 missing = eA;
        for (std::size_t a = 0; a < D.axes.size(); ++a) {
            if (a == ti) continue;
            const Axis label = D.axes[a].label;
            const Complex g = D.first(flat, a) - component(eA, label);
            kinetic += g * g;
            if (label == Axis::x) missing.x = 0.0;
            if (label == Axis::y) missing.y = 0.0;
            if (label == Axis::z) missing.z = 0.0;
        }
        kinetic += dot(missing, missing);
        return D.first(flat, ti) + 0.5 * kinetic + e * pot.U(p.position(), p.t);
    };
    return report(action, stencil, op, exec);
}

ComplexField action_field_from_psi(const ComplexField& psi) {
    const Grid& g = psi.grid;
    ComplexField s(g);
    {
        const Complex p0 = psi.values[0];
        if (p0 == Complex(0.0, 0.0)) throw SingularPointError("action_field_from_psi: Psi vanishes at the origin");
        s.values[0] = Complex(std::arg(p0), -std::log(std::abs(p0)));
    }
    for (std::size_t a = 0; a < g.rank(); ++a) {
        // Seeds: every index combination over axes < a, zero elsewhere.
        std::size_t seeds = 1;
        for (std::size_t b = 0; b < a; ++b) seeds *= g.axis(b).count;
        const auto n_seeds = static_cast<std::ptrdiff_t>(seeds);
        const std::size_t stride = g.stride(a);
        const std::size_t count = g.axis(a).count;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < n_seeds; ++k) {
            std::size_t rem = static_cast<std::size_t>(k);
            std::size_t flat = 0;
            for (std::size_t b = a; b-- > 0;) {
                flat += (rem % g.axis(b).count) * g.stride(b);
                rem /= g.axis(b).count;
            }
            ActionValue prev{s.values[flat], branch_of(s.values[flat])};
            for (std::size_t i = 1; i < count; ++i) {
                const std::size_t here = flat + i * stride;
                prev = continue_action(prev, psi.values[here - stride], psi.values[here]);
                s.values[here] = prev.value;
            }
        }
    }
    return s;
}

double observed_order(double h_coarse, double err_coarse, double h_fine, double err_fine) {
    if (!(h_coarse > h_fine) || !(h_fine > 0.0) || !(err_coarse > 0.0) || !(err_fine > 0.0)) {
        throw InvalidInput("observed_order: need h_coarse > h_fine > 0 and positive errors");
    }
    return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

std::vector<double> pairwise_orders(std::span<const double> h, std::span<const double> err) {
    if (h.size() != err.size()) throw InvalidInput("pairwise_orders: size mismatch");
    std::vector<double> out;
    for (std::size_t i = 1; i < h.size(); ++i) out.push_back(observed_order(h[i - 1], err[i - 1], h[i], err[i]));
    return out;
}

}  // namespace breather
