#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "breather/analytic.hpp"
#include "breather/errors.hpp"
#include "breather/evolution.hpp"
#include "breather/kernels.hpp"
#include "breather/parallel.hpp"
#include "breather/quantization.hpp"
#include "breather/residual.hpp"

using namespace breather;
namespace k = breather::kernels;

namespace {

constexpr Complex kI{0.0, 1.0};

// Restores the default worker count when a test case ends.
struct WorkerGuard {
    ~WorkerGuard() { set_workers(0); }
};

std::vector<Complex> random_field(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Complex> v(n);
    for (auto& c : v) c = {u(rng), u(rng)};
    return v;
}

const std::vector<int> kWorkerCounts{1, 2, 3, 4, 7};

}  // namespace

TEST_CASE("worker count control") {
    WorkerGuard guard;
    set_workers(3);
#ifdef BREATHER_HAVE_OPENMP
    CHECK(workers() == 3);
#else
    CHECK(workers() == 1);
#endif
    set_workers(0);
    CHECK(workers() >= 1);
}

TEST_CASE("map_grid: serial and OpenMP agree and report the first bad index") {
    WorkerGuard guard;
    const Grid g({{Axis::t, 5, 0.0, 0.1}, {Axis::x, 30, -1.0, 0.07}, {Axis::y, 30, -1.0, 0.07}});
    const BreatherSpec spec{0.3, 1, 1, {0.2, 0.0, 0.0}, {}};
    const PointFunction f = [spec](const SpacetimePoint& p) { return breather_psi(spec, p); };
    std::vector<Complex> a(g.size()), b(g.size());
    CHECK(k::serial::map_grid(g, f, a) == k::kNoIndex);
    for (const int w : kWorkerCounts) {
        set_workers(w);
        CHECK(k::omp::map_grid(g, f, b) == k::kNoIndex);
        CHECK(a == b);
    }
    const PointFunction bad = [](const SpacetimePoint& p) {
        return p.x > 0.5 && p.y > 0.0 ? Complex(NAN, 0.0) : Complex(1.0, 0.0);
    };
    const std::size_t want = k::serial::map_grid(g, bad, a);
    REQUIRE(want != k::kNoIndex);
    for (const int w : kWorkerCounts) {
        set_workers(w);
        CHECK(k::omp::map_grid(g, bad, b) == want);
    }
}

TEST_CASE("blocked sums are independent of the worker count") {
    WorkerGuard guard;
    // Long enough for many reduction blocks; terms of mixed magnitude so that
    // any change in summation order would show up in the last bits.
    const std::size_t n = 37 * kReductionBlock + 123;
    const k::FlatReal f = [](std::size_t i) { return std::sin(0.37 * static_cast<double>(i)) * std::exp(1e-5 * static_cast<double>(i % 977)); };
    const double ref = k::serial::blocked_sum(n, f);
    for (const int w : kWorkerCounts) {
        set_workers(w);
        CHECK(k::omp::blocked_sum(n, f) == ref);
    }
    CHECK(k::serial::blocked_sum(0, f) == 0.0);
    CHECK(k::omp::blocked_sum(0, f) == 0.0);
}

TEST_CASE("interior norms are bitwise identical") {
    WorkerGuard guard;
    const Grid g({{Axis::t, 9, 0.0, 0.1}, {Axis::x, 40, 0.0, 0.1}, {Axis::y, 41, 0.0, 0.1}, {Axis::z, 42, 0.0, 0.1}});
    const auto layout = k::Layout::of(g);
    const auto data = random_field(g.size(), 5);
    const k::FlatFunction op = [&](std::size_t i) { return data[i] * data[i] - 0.5; };
    for (const std::size_t margin : {1u, 2u}) {
        const auto ref = k::serial::interior_norms(layout, margin, op);
        CHECK(ref.count == (9 - 2 * margin) * (40 - 2 * margin) * (41 - 2 * margin) * (42 - 2 * margin));
        for (const int w : kWorkerCounts) {
            set_workers(w);
            const auto got = k::omp::interior_norms(layout, margin, op);
            CHECK(got.linf == ref.linf);
            CHECK(got.sum_sq == ref.sum_sq);
            CHECK(got.count == ref.count);
        }
    }
}

TEST_CASE("leapfrog step kernels agree for both boundary modes") {
    WorkerGuard guard;
    const Grid g({{Axis::x, 23, 0.0, 0.1}, {Axis::y, 24, 0.0, 0.1}, {Axis::z, 25, 0.0, 0.1}});
    const auto layout = k::Layout::of(g);
    const auto now = random_field(g.size(), 1);
    const auto prev = random_field(g.size(), 2);
    for (const bool periodic : {false, true}) {
        std::vector<Complex> ref(g.size(), Complex(7.0, 7.0)), got(g.size(), Complex(7.0, 7.0));
        k::serial::leapfrog_step(layout, 0.03, now, prev, ref, periodic);
        for (const int w : kWorkerCounts) {
            set_workers(w);
            std::fill(got.begin(), got.end(), Complex(7.0, 7.0));
            k::omp::leapfrog_step(layout, 0.03, now, prev, got, periodic);
            CHECK(got == ref);
        }
        // Dirichlet leaves the outer layer alone.
        CHECK((ref[0] == Complex(7.0, 7.0)) == !periodic);
    }
}

TEST_CASE("transport kernels agree") {
    WorkerGuard guard;
    const Grid g({{Axis::x, 50, 0.0, 0.1}, {Axis::y, 51, 0.0, 0.1}});
    const auto layout = k::Layout::of(g);
    std::vector<double> s(g.size());
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& x : s) x = u(rng);
    const std::array<double, 4> vel{0.0, 0.0, 0.6, -0.2};
    std::vector<double> ref(g.size()), got(g.size());
    k::serial::transport_rhs(layout, vel, s, ref);
    for (const int w : kWorkerCounts) {
        set_workers(w);
        k::omp::transport_rhs(layout, vel, s, got);
        CHECK(got == ref);
    }
}

TEST_CASE("library results do not depend on the worker count") {
    WorkerGuard guard;
    const BreatherSpec spec{0.3, 0, 0, {0.3, 0.0, 0.0}, {}};
    const PointFunction exact = [spec](const SpacetimePoint& p) { return breather_psi(spec, p); };
    const Grid box({{Axis::t, 13, 0.0, 0.2}, {Axis::x, 13, -1.0, 0.2}, {Axis::y, 13, -1.0, 0.2}, {Axis::z, 13, -1.0, 0.2}});
    const Grid cube({{Axis::x, 21, -1.0, 0.1}, {Axis::y, 21, -1.0, 0.1}, {Axis::z, 21, -1.0, 0.1}});
    EvolveOptions opt;
    opt.boundary = Boundary::analytic_dirichlet;
    opt.reference = exact;

    struct Snapshot {
        double kg_l2, qhj_l2, evolve_err, defect;
        std::vector<Complex> field;
    };
    auto snapshot = [&] {
        Snapshot s;
        const auto psi = eval_on_grid(exact, box);
        s.kg_l2 = kg_residual(psi, StencilSpec{}).l2;
        s.qhj_l2 = qhj_residual(action_field_from_psi(psi), StencilSpec{}).l2;
        const auto res = kg_evolve(exact_state(exact, cube, 0.0, 0.04), 15, opt);
        s.evolve_err = relative_l2_error(res.state.psi_now, exact);
        s.field = res.state.psi_now.values;
        const double p = 0.1, E = std::sqrt(1.0 + p * p);
        const std::vector<SpacetimePoint> pts{{0.0, 1.0, 0.2, 0.0}, {0.0, 20.0, 0.1, 0.3}};
        s.defect = periodicity_defect({50.0, p / E, 0.1, 50}, E, p, pts);
        return s;
    };
    set_workers(1);
    const Snapshot ref = snapshot();
    for (const int w : {2, 5}) {
        set_workers(w);
        const Snapshot got = snapshot();
        CHECK(got.kg_l2 == ref.kg_l2);
        CHECK(got.qhj_l2 == ref.qhj_l2);
        CHECK(got.evolve_err == ref.evolve_err);
        CHECK(got.defect == ref.defect);
        CHECK(got.field == ref.field);
    }
}
