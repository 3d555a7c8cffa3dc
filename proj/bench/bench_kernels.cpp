// Serial reference loops against the OpenMP kernels. Each benchmark takes the
// edge length n of a cube (n^3 points) as its argument.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "breather/analytic.hpp"
#include "breather/kernels.hpp"

namespace k = breather::kernels;
using breather::Complex;
using breather::Grid;

namespace {

Grid cube(std::size_t n) { return Grid::spatial_cube(-4.0, 4.0, n); }

std::vector<Complex> random_field(std::size_t size, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Complex> v(size);
    for (auto& z : v) z = {u(rng), u(rng)};
    return v;
}

const breather::PointFunction kPsi = [](const breather::SpacetimePoint& p) {
    return breather::breather_psi(breather::BreatherSpec{{0.3, 0.0}}, p);
};

template <bool Parallel>
void BM_map_grid(benchmark::State& state) {
    const auto g = cube(static_cast<std::size_t>(state.range(0)));
    std::vector<Complex> out(g.size());
    for (auto _ : state) {
        const auto bad = Parallel ? k::omp::map_grid(g, kPsi, out) : k::serial::map_grid(g, kPsi, out);
        benchmark::DoNotOptimize(bad);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}

template <bool Parallel>
void BM_interior_norms(benchmark::State& state) {
    const auto g = cube(static_cast<std::size_t>(state.range(0)));
    const auto layout = k::Layout::of(g);
    const auto field = random_field(g.size(), 1);
    const k::FlatFunction op = [&](std::size_t i) { return field[i] * field[i]; };
    for (auto _ : state) {
        const auto n = Parallel ? k::omp::interior_norms(layout, 1, op) : k::serial::interior_norms(layout, 1, op);
        benchmark::DoNotOptimize(n);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}

template <bool Parallel>
void BM_blocked_sum(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t size = n * n * n;
    const k::FlatReal f = [](std::size_t i) { return std::sin(1e-3 * static_cast<double>(i)); };
    for (auto _ : state) {
        const double s = Parallel ? k::omp::blocked_sum(size, f) : k::serial::blocked_sum(size, f);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(size));
}

template <bool Parallel>
void BM_leapfrog_step(benchmark::State& state) {
    const auto g = cube(static_cast<std::size_t>(state.range(0)));
    const auto layout = k::Layout::of(g);
    const auto now = random_field(g.size(), 2);
    const auto prev = random_field(g.size(), 3);
    std::vector<Complex> next(g.size());
    for (auto _ : state) {
        if (Parallel) {
            k::omp::leapfrog_step(layout, 0.01, now, prev, next, false);
        } else {
            k::serial::leapfrog_step(layout, 0.01, now, prev, next, false);
        }
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}

template <bool Parallel>
void BM_transport_rhs(benchmark::State& state) {
    const auto g = cube(static_cast<std::size_t>(state.range(0)));
    const auto layout = k::Layout::of(g);
    const auto field = random_field(g.size(), 4);
    std::vector<double> s(g.size()), out(g.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = field[i].real();
    const std::array<double, 4> vel{0.0, 0.6, -0.2, 0.1};
    for (auto _ : state) {
        if (Parallel) {
            k::omp::transport_rhs(layout, vel, s, out);
        } else {
            k::serial::transport_rhs(layout, vel, s, out);
        }
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}

}  // namespace

#define BREATHER_BENCH_PAIR(fn)                                           \
    BENCHMARK(fn<false>)->Name(#fn "/serial")->Arg(32)->Arg(64)->Arg(96); \
    BENCHMARK(fn<true>)->Name(#fn "/omp")->Arg(32)->Arg(64)->Arg(96)

BREATHER_BENCH_PAIR(BM_map_grid);
BREATHER_BENCH_PAIR(BM_interior_norms);
BREATHER_BENCH_PAIR(BM_blocked_sum);
BREATHER_BENCH_PAIR(BM_leapfrog_step);
BREATHER_BENCH_PAIR(BM_transport_rhs);

BENCHMARK_MAIN();
