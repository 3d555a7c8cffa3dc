#pragma once

// Data-parallel inner loops. Every kernel exists twice: an OpenMP version
// used by the library and a plain serial loop kept as the reference the
// tests and the benchmark compare against. Both visit points in the same
// arithmetic order and reduce in fixed blocks, so their outputs are
// bitwise identical for any worker count.

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>

#include "grid.hpp"

namespace breather::kernels {

/// Shape of a field padded to rank 4 with leading unit axes.
struct Layout {
    std::array<std::size_t, 4> count{1, 1, 1, 1};
    std::array<std::size_t, 4> stride{0, 0, 0, 1};
    std::array<double, 4> spacing{1.0, 1.0, 1.0, 1.0};
    std::size_t rank = 0;  ///< number of real (unpadded) axes
    std::size_t size = 1;

    static Layout of(const Grid& g);
    /// Padded slot of grid axis i.
    std::size_t slot(std::size_t i) const { return 4 - rank + i; }
};

struct Norms {
    double linf = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
};

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

using FlatFunction = std::function<Complex(std::size_t flat)>;
using FlatReal = std::function<double(std::size_t i)>;

namespace serial {

/// out[i] = f(g.point(i)); returns the first index with a non-finite value, or kNoIndex.
std::size_t map_grid(const Grid& g, const PointFunction& f, std::span<Complex> out);

/// Norms of residual(flat) over points at least `margin` cells from every edge.
Norms interior_norms(const Layout& layout, std::size_t margin, const FlatFunction& residual);

/// Sum of f(i) for i in [0, n), blocked.
double blocked_sum(std::size_t n, const FlatReal& f);

/// next = 2 now - prev + dt^2 (lap now - now). Dirichlet mode leaves the
/// outermost layer of `next` untouched; periodic mode wraps neighbours.
void leapfrog_step(const Layout& spatial, double dt, std::span<const Complex> now,
                   std::span<const Complex> prev, std::span<Complex> next, bool periodic);

/// out = -sum_a velocity[a] d_a s with second-order central differences; s = 0 outside.
void transport_rhs(const Layout& spatial, const std::array<double, 4>& velocity,
                   std::span<const double> s, std::span<double> out);

}  // namespace serial

namespace omp {

std::size_t map_grid(const Grid& g, const PointFunction& f, std::span<Complex> out);
Norms interior_norms(const Layout& layout, std::size_t margin, const FlatFunction& residual);
double blocked_sum(std::size_t n, const FlatReal& f);
void leapfrog_step(const Layout& spatial, double dt, std::span<const Complex> now,
                   std::span<const Complex> prev, std::span<Complex> next, bool periodic);
void transport_rhs(const Layout& spatial, const std::array<double, 4>& velocity,
                   std::span<const double> s, std::span<double> out);

}  // namespace omp

}  // namespace breather::kernels
