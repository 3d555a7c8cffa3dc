#include "breather/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "breather/parallel.hpp"

namespace breather::kernels {

Layout Layout::of(const Grid& g) {
    Layout l;
    l.rank = g.rank();
    l.size = g.size();
    for (std::size_t i = 0; i < g.rank(); ++i) {
        const std::size_t s = l.slot(i);
        l.count[s] = g.axis(i).count;
        l.stride[s] = g.stride(i);
        l.spacing[s] = g.axis(i).spacing;
    }
    return l;
}

namespace {

bool finite(const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

std::size_t first_non_finite(std::span<const Complex> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!finite(v[i])) return i;
    }
    return kNoIndex;
}

// Interior box of a layout: per-slot first index and extent.
struct Interior {
    std::array<std::size_t, 4> lo{};
    std::array<std::size_t, 4> extent{1, 1, 1, 1};
    std::size_t size = 0;
};

Interior interior_of(const Layout& l, std::size_t margin) {
    Interior in;
    in.size = 1;
    for (std::size_t s = 4 - l.rank; s < 4; ++s) {
        if (l.count[s] <= 2 * margin) {
            in.size = 0;
            return in;
        }
        in.lo[s] = margin;
        in.extent[s] = l.count[s] - 2 * margin;
        in.size *= in.extent[s];
    }
    return in;
}

std::size_t interior_flat(const Layout& l, const Interior& in, std::size_t j) {
    std::size_t flat = 0;
    for (std::size_t s = 4; s-- > 0;) {
        const std::size_t k = j % in.extent[s];
        j /= in.extent[s];
        flat += (in.lo[s] + k) * l.stride[s];
    }
    return flat;
}

struct BlockNorm {
    double linf = 0.0;
    double sum_sq = 0.0;
};

BlockNorm interior_block(const Layout& l, const Interior& in, std::size_t b, const FlatFunction& residual) {
    BlockNorm out;
    const std::size_t end = std::min(in.size, (b + 1) * kReductionBlock);
    for (std::size_t j = b * kReductionBlock; j < end; ++j) {
        const Complex r = residual(interior_flat(l, in, j));
        const double a = std::abs(r);
        out.linf = std::max(out.linf, std::isnan(a) ? INFINITY : a);
        out.sum_sq += std::norm(r);
    }
    return out;
}

Norms combine(const std::vector<BlockNorm>& blocks, std::size_t count) {
    Norms n;
    n.count = count;
    for (const auto& b : blocks) {
        n.linf = std::max(n.linf, b.linf);
        n.sum_sq += b.sum_sq;
    }
    return n;
}

double sum_block(std::size_t n, std::size_t b, const FlatReal& f) {
    double s = 0.0;
    const std::size_t end = std::min(n, (b + 1) * kReductionBlock);
    for (std::size_t i = b * kReductionBlock; i < end; ++i) s += f(i);
    return s;
}

std::size_t block_count(std::size_t n) { return (n + kReductionBlock - 1) / kReductionBlock; }

struct StepGeometry {
    std::array<std::size_t, 4> count;
    std::array<std::size_t, 4> stride;
    std::array<double, 4> inv_h2{};
    std::array<bool, 4> active{};
};

StepGeometry step_geometry(const Layout& l) {
    StepGeometry g{l.count, l.stride, {}, {}};
    for (std::size_t s = 4 - l.rank; s < 4; ++s) {
        g.active[s] = l.count[s] > 1;
        g.inv_h2[s] = g.active[s] ? 1.0 / (l.spacing[s] * l.spacing[s]) : 0.0;
    }
    return g;
}

// One leapfrog update at (i1, i2, i3); slot 0 of a spatial layout is padding.
inline void leapfrog_point(const StepGeometry& g, double dt2, std::span<const Complex> now,
                           std::span<const Complex> prev, std::span<Complex> next, bool periodic,
                           std::size_t i1, std::size_t i2, std::size_t i3) {
    const std::array<std::size_t, 4> idx{0, i1, i2, i3};
    if (!periodic) {
        for (std::size_t s = 1; s < 4; ++s) {
            if (g.active[s] && (idx[s] == 0 || idx[s] + 1 == g.count[s])) return;
        }
    }
    const std::size_t flat = i1 * g.stride[1] + i2 * g.stride[2] + i3 * g.stride[3];
    const Complex c = now[flat];
    Complex lap{0.0, 0.0};
    for (std::size_t s = 1; s < 4; ++s) {
        if (!g.active[s]) continue;
        const std::size_t n = g.count[s];
        const std::size_t up = idx[s] + 1 == n ? flat - (n - 1) * g.stride[s] : flat + g.stride[s];
        const std::size_t down = idx[s] == 0 ? flat + (n - 1) * g.stride[s] : flat - g.stride[s];
        lap += (now[up] + now[down] - 2.0 * c) * g.inv_h2[s];
    }
    const Complex a = 2.0 * c + dt2 * (lap - c);
    next[flat] = a - prev[flat];
}

inline double transport_point(const Layout& l, const std::array<double, 4>& velocity, std::span<const double> s,
                              std::size_t i1, std::size_t i2, std::size_t i3) {
    const std::array<std::size_t, 4> idx{0, i1, i2, i3};
    const std::size_t flat = i1 * l.stride[1] + i2 * l.stride[2] + i3 * l.stride[3];
    double rhs = 0.0;
    for (std::size_t a = 4 - l.rank; a < 4; ++a) {
        if (velocity[a] == 0.0 || l.count[a] < 2) continue;
        const double up = idx[a] + 1 < l.count[a] ? s[flat + l.stride[a]] : 0.0;
        const double down = idx[a] > 0 ? s[flat - l.stride[a]] : 0.0;
        rhs -= velocity[a] * (up - down) / (2.0 * l.spacing[a]);
    }
    return rhs;
}

}  // namespace

namespace serial {

std::size_t map_grid(const Grid& g, const PointFunction& f, std::span<Complex> out) {
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.point(i));
    return first_non_finite(out);
}

Norms interior_norms(const Layout& layout, std::size_t margin, const FlatFunction& residual) {
    const Interior in = interior_of(layout, margin);
    std::vector<BlockNorm> blocks(block_count(in.size));
    for (std::size_t b = 0; b < blocks.size(); ++b) blocks[b] = interior_block(layout, in, b, residual);
    return combine(blocks, in.size);
}

double blocked_sum(std::size_t n, const FlatReal& f) {
    double total = 0.0;
    for (std::size_t b = 0; b < block_count(n); ++b) total += sum_block(n, b, f);
    return total;
}

void leapfrog_step(const Layout& spatial, double dt, std::span<const Complex> now, std::span<const Complex> prev,
                   std::span<Complex> next, bool periodic) {
    const StepGeometry g = step_geometry(spatial);
    const double dt2 = dt * dt;
    for (std::size_t i1 = 0; i1 < g.count[1]; ++i1)
        for (std::size_t i2 = 0; i2 < g.count[2]; ++i2)
            for (std::size_t i3 = 0; i3 < g.count[3]; ++i3)
                leapfrog_point(g, dt2, now, prev, next, periodic, i1, i2, i3);
}

void transport_rhs(const Layout& spatial, const std::array<double, 4>& velocity, std::span<const double> s,
                   std::span<double> out) {
    for (std::size_t i1 = 0; i1 < spatial.count[1]; ++i1)
        for (std::size_t i2 = 0; i2 < spatial.count[2]; ++i2)
            for (std::size_t i3 = 0; i3 < spatial.count[3]; ++i3)
                out[i1 * spatial.stride[1] + i2 * spatial.stride[2] + i3 * spatial.stride[3]] =
                    transport_point(spatial, velocity, s, i1, i2, i3);
}

}  // namespace serial

namespace omp {

std::size_t map_grid(const Grid& g, const PointFunction& f, std::span<Complex> out) {
    const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = f(g.point(static_cast<std::size_t>(i)));
    return first_non_finite(out);
}

Norms interior_norms(const Layout& layout, std::size_t margin, const FlatFunction& residual) {
    const Interior in = interior_of(layout, margin);
    std::vector<BlockNorm> blocks(block_count(in.size));
    const auto nb = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
        blocks[b] = interior_block(layout, in, static_cast<std::size_t>(b), residual);
    }
    return combine(blocks, in.size);
}

double blocked_sum(std::size_t n, const FlatReal& f) {
    std::vector<double> partial(block_count(n));
    const auto nb = static_cast<std::ptrdiff_t>(partial.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < nb; ++b) partial[b] = sum_block(n, static_cast<std::size_t>(b), f);
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

void leapfrog_step(const Layout& spatial, double dt, std::span<const Complex> now, std::span<const Complex> prev,
                   std::span<Complex> next, bool periodic) {
    const StepGeometry g = step_geometry(spatial);
    const double dt2 = dt * dt;
    const auto n1 = static_cast<std::ptrdiff_t>(g.count[1]);
    const auto n2 = static_cast<std::ptrdiff_t>(g.count[2]);
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t i1 = 0; i1 < n1; ++i1)
        for (std::ptrdiff_t i2 = 0; i2 < n2; ++i2)
            for (std::size_t i3 = 0; i3 < g.count[3]; ++i3)
                leapfrog_point(g, dt2, now, prev, next, periodic, static_cast<std::size_t>(i1),
                               static_cast<std::size_t>(i2), i3);
}

void transport_rhs(const Layout& spatial, const std::array<double, 4>& velocity, std::span<const double> s,
                   std::span<double> out) {
    const auto n1 = static_cast<std::ptrdiff_t>(spatial.count[1]);
    const auto n2 = static_cast<std::ptrdiff_t>(spatial.count[2]);
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t i1 = 0; i1 < n1; ++i1)
        for (std::ptrdiff_t i2 = 0; i2 < n2; ++i2)
            for (std::size_t i3 = 0; i3 < spatial.count[3]; ++i3) {
                const auto a = static_cast<std::size_t>(i1);
                const auto b = static_cast<std::size_t>(i2);
                out[a * spatial.stride[1] + b * spatial.stride[2] + i3 * spatial.stride[3]] =
                    transport_point(spatial, velocity, s, a, b, i3);
            }
}

}  // namespace omp

}  // namespace breather::kernels
